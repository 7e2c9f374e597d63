#include "fk/zeroset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "fk/errors.hpp"

namespace fk {

namespace {

int mod_index(std::int64_t i, int n) {
    std::int64_t r = i % n;
    if (r < 0) r += n;
    return static_cast<int>(r);
}

// cubic Hermite on [0,1]: values f0,f1 and scaled slopes g0,g1 (= h * dw/dt)
struct Cubic {
    double a, b, c, d; // a s^3 + b s^2 + c s + d

    double eval(double s) const { return ((a * s + b) * s + c) * s + d; }
    double slope(double s) const { return (3.0 * a * s + 2.0 * b) * s + c; }
};

Cubic hermite(double f0, double f1, double g0, double g1) {
    return {2.0 * f0 + g0 - 2.0 * f1 + g1, -3.0 * f0 - 2.0 * g0 + 3.0 * f1 - g1, g0, f0};
}

// ascending critical points of the cubic inside (0,1)
int critical_points(const Cubic& h, double* out) {
    const double qa = 3.0 * h.a, qb = 2.0 * h.b, qc = h.c;
    int cnt = 0;
    if (qa == 0.0) {
        if (qb != 0.0) {
            const double s = -qc / qb;
            if (s > 0.0 && s < 1.0) out[cnt++] = s;
        }
        return cnt;
    }
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc < 0.0) return 0;
    const double root = std::sqrt(disc);
    // numerically stable pair
    const double q = -0.5 * (qb + (qb >= 0.0 ? root : -root));
    double s1 = q / qa;
    double s2 = (q != 0.0) ? qc / q : s1;
    if (s1 > s2) std::swap(s1, s2);
    if (s1 > 0.0 && s1 < 1.0) out[cnt++] = s1;
    if (s2 > 0.0 && s2 < 1.0 && s2 != s1) out[cnt++] = s2;
    return cnt;
}

double bisect(const Cubic& h, double lo, double hi) {
    double flo = h.eval(lo);
    for (int it = 0; it < 90; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = h.eval(mid);
        if (fm == 0.0) return mid;
        if ((flo < 0.0) != (fm < 0.0)) {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    return 0.5 * (lo + hi);
}

// all odd-multiplicity roots in (0,1), ascending
int cubic_roots(const Cubic& h, double* out) {
    double pts[4];
    int np = 0;
    pts[np++] = 0.0;
    np += critical_points(h, pts + np);
    pts[np++] = 1.0;
    int cnt = 0;
    for (int i = 0; i + 1 < np; ++i) {
        const double fa = h.eval(pts[i]), fb = h.eval(pts[i + 1]);
        if (fa == 0.0 && pts[i] > 0.0) {
            if (cnt == 0 || out[cnt - 1] != pts[i]) out[cnt++] = pts[i];
        } else if ((fa < 0.0) != (fb < 0.0) && fa != 0.0 && fb != 0.0) {
            out[cnt++] = bisect(h, pts[i], pts[i + 1]);
        }
    }
    return cnt;
}

struct Root {
    double t;
    int site;
};

} // namespace

int snapped_sign(double x, double tol_abs) {
    if (x > tol_abs) return 1;
    if (x < -tol_abs) return -1;
    return 0;
}

std::vector<int> zero_profile(const std::vector<double>& w, double tol_abs) {
    const int n = static_cast<int>(w.size());
    std::vector<int> z(n, 0);
    for (int j = 0; j < n; ++j) {
        const int s0 = snapped_sign(w[j], tol_abs);
        const int s1 = snapped_sign(w[(j + 1) % n], tol_abs);
        z[j] = (s0 == 0 || s0 * s1 < 0) ? 1 : 0;
    }
    return z;
}

int count_zeros(const std::vector<double>& w, double tol_abs) {
    const auto z = zero_profile(w, tol_abs);
    int c = 0;
    for (int v : z) c += v;
    return c;
}

int count_zeros_window(const std::vector<double>& w, std::int64_t m, std::int64_t n,
                       double tol_abs) {
    if (m >= n) throw config_error("count_zeros_window: empty window");
    const auto z = zero_profile(w, tol_abs);
    const int size = static_cast<int>(w.size());
    int c = 0;
    for (std::int64_t j = m; j < n; ++j) c += z[mod_index(j, size)];
    return c;
}

ZeroSiteClass classify_zero(const std::vector<double>& w, int site, double tol_abs) {
    const int n = static_cast<int>(w.size());
    if (n < 1) throw config_error("classify_zero: empty profile");
    ZeroSiteClass out;
    const int j = mod_index(site, n);
    if (snapped_sign(w[j], tol_abs) != 0) return out;
    out.zero_site = true;

    int s0 = j;
    while (snapped_sign(w[mod_index(s0 - 1, n)], tol_abs) == 0) {
        --s0;
        if (j - s0 >= n) throw config_error("classify_zero: zero run covers the whole period");
    }
    int k = 1;
    while (snapped_sign(w[mod_index(s0 + k, n)], tol_abs) == 0) ++k;

    out.run_start = mod_index(s0, n);
    out.degree = k;
    out.sigma_left = snapped_sign(w[mod_index(s0 - 1, n)], tol_abs);
    out.sigma_right = snapped_sign(w[mod_index(s0 + k, n)], tol_abs);
    out.singular = (k >= 2) || (out.sigma_left == out.sigma_right);
    if (out.singular)
        out.type = (out.sigma_left == out.sigma_right) ? SingularType::type_two
                                                       : SingularType::type_one;
    return out;
}

LinearCoeffs linearized_coeffs(const ChainState& s, const Potential& pot) {
    validate_state(s);
    LinearCoeffs lc;
    lc.a.resize(s.n);
    lc.b.resize(s.n);
    lc.c.resize(s.n);
    lc.delta = pot.twist_delta;
    for (int j = 0; j < s.n; ++j) {
        const double um = s.site(static_cast<std::int64_t>(j) - 1);
        const double u0 = s.u[j];
        const double up = s.site(static_cast<std::int64_t>(j) + 1);
        lc.a[j] = -pot.V12(um, u0);
        lc.b[j] = -pot.V12(u0, up);
        lc.c[j] = -(pot.V22(um, u0) + pot.V11(u0, up));
    }
    return lc;
}

std::vector<LeadingTerm> predict_leading_coeffs(const std::vector<double>& w,
                                                const LinearCoeffs& coeffs, int run_start,
                                                int degree, double tol_abs) {
    const int n = static_cast<int>(w.size());
    if (degree < 1 || degree >= n)
        throw config_error("predict_leading_coeffs: bad run degree");
    if (coeffs.a.size() != w.size() || coeffs.b.size() != w.size() ||
        coeffs.c.size() != w.size())
        throw config_error("predict_leading_coeffs: coefficient size mismatch");

    std::vector<double> prev(w);
    for (double& x : prev)
        if (std::abs(x) <= tol_abs) x = 0.0;

    int l_max = 0;
    for (int i = 0; i < degree; ++i) l_max = std::max(l_max, std::min(i + 1, degree - i));

    // levels[l][j] = d_l[j]
    std::vector<std::vector<double>> levels;
    levels.push_back(prev);
    for (int l = 1; l <= l_max; ++l) {
        std::vector<double> cur(n);
        const auto& p = levels.back();
        for (int j = 0; j < n; ++j) {
            const double lhs = coeffs.a[j] * p[mod_index(j - 1, n)] +
                               coeffs.b[j] * p[mod_index(j + 1, n)] + coeffs.c[j] * p[j];
            cur[j] = lhs / l;
        }
        levels.push_back(std::move(cur));
    }

    std::vector<LeadingTerm> out(degree);
    for (int i = 0; i < degree; ++i) {
        const int ord = std::min(i + 1, degree - i);
        out[i].order = ord;
        out[i].coeff = levels[ord][mod_index(run_start + i, n)];
    }
    return out;
}

namespace {

struct Tracker {
    const LinearTrajectory& tr;
    ZeroTolerances tol;
    int n = 0;
    double scale = 0.0, tol_abs = 0.0, tang_abs = 0.0, run_tol = 0.0;

    std::vector<double> profile_at(double t) const {
        const auto& ts = tr.times;
        if (t <= ts.front()) return tr.w.front();
        if (t >= ts.back()) return tr.w.back();
        const auto it = std::upper_bound(ts.begin(), ts.end(), t);
        const std::size_t k = static_cast<std::size_t>(it - ts.begin()) - 1;
        const double h = ts[k + 1] - ts[k];
        const double s = (t - ts[k]) / h;
        std::vector<double> out(n);
        for (int j = 0; j < n; ++j) {
            const Cubic cub =
                hermite(tr.w[k][j], tr.w[k + 1][j], h * tr.dwdt[k][j], h * tr.dwdt[k + 1][j]);
            out[j] = cub.eval(s);
        }
        return out;
    }
};

} // namespace

ZeroLedger track_zero_events(const LinearTrajectory& tr, const ZeroTolerances& tol) {
    if (tr.times.size() < 2 || tr.w.size() != tr.times.size() ||
        tr.dwdt.size() != tr.times.size())
        throw config_error("track_zero_events: inconsistent trajectory");
    const int n = static_cast<int>(tr.w.front().size());
    if (n < 2) throw config_error("track_zero_events: need at least two sites");

    Tracker trk{tr, tol, n, 0.0, 0.0, 0.0, 0.0};
    for (const auto& prof : tr.w)
        for (double x : prof) trk.scale = std::max(trk.scale, std::abs(x));
    if (trk.scale == 0.0) throw config_error("track_zero_events: identically zero profile");
    trk.scale = std::max(1.0, trk.scale); // tolerance scale floored at unit profile
    trk.tol_abs = tol.zero_rel * trk.scale;
    trk.tang_abs = tol.tangency_rel * trk.scale;
    trk.run_tol = std::max(trk.tol_abs, 1e-9 * trk.scale);

    for (double x : tr.w.front())
        if (std::abs(x) <= trk.tol_abs)
            throw config_error("track_zero_events: initial profile touches zero");
    for (double x : tr.w.back())
        if (std::abs(x) <= trk.tol_abs)
            throw config_error("track_zero_events: final profile touches zero");

    ZeroLedger led;
    led.n = n;
    led.t0 = tr.times.front();
    led.t1 = tr.times.back();
    led.z_start = zero_profile(tr.w.front(), trk.tol_abs);
    led.z_end = zero_profile(tr.w.back(), trk.tol_abs);
    led.crossings.assign(n, 0);
    led.deaths.assign(n, 0);

    // 1. locate every sign passage and near miss, site by site
    std::vector<Root> roots;
    std::vector<NearTangency> grazes;
    const std::size_t nk = tr.times.size() - 1;
    for (int j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < nk; ++k) {
            const double h = tr.times[k + 1] - tr.times[k];
            const double f0 = tr.w[k][j], f1 = tr.w[k + 1][j];
            const int s0 = snapped_sign(f0, trk.tol_abs);
            const int s1 = snapped_sign(f1, trk.tol_abs);
            if (s0 == 0 && k > 0) roots.push_back({tr.times[k], j});

            const Cubic cub = hermite(f0, f1, h * tr.dwdt[k][j], h * tr.dwdt[k + 1][j]);
            double rr[3];
            const int nr = cubic_roots(cub, rr);
            for (int r = 0; r < nr; ++r) roots.push_back({tr.times[k] + rr[r] * h, j});

            if (nr == 0 && s0 != 0 && s0 == s1) {
                double cp[2];
                const int nc = critical_points(cub, cp);
                for (int c = 0; c < nc; ++c) {
                    const double v = cub.eval(cp[c]);
                    if (std::abs(v) <= trk.tang_abs)
                        grazes.push_back({tr.times[k] + cp[c] * h, j, std::abs(v)});
                }
            }
        }
    }
    std::sort(roots.begin(), roots.end(), [](const Root& x, const Root& y) { return x.t < y.t; });

    // merge repeated near-miss records per site
    std::sort(grazes.begin(), grazes.end(), [](const NearTangency& x, const NearTangency& y) {
        return x.site != y.site ? x.site < y.site : x.t < y.t;
    });
    double max_h = 0.0;
    for (std::size_t k = 0; k < nk; ++k) max_h = std::max(max_h, tr.times[k + 1] - tr.times[k]);
    for (const auto& g : grazes) {
        if (!led.tangencies.empty() && led.tangencies.back().site == g.site &&
            g.t - led.tangencies.back().t <= 2.0 * max_h) {
            if (g.min_abs < led.tangencies.back().min_abs) led.tangencies.back() = g;
        } else {
            led.tangencies.push_back(g);
        }
    }

    // 2. cluster in time
    std::vector<std::pair<double, std::vector<int>>> clusters; // (mean t, sites)
    {
        std::size_t i = 0;
        while (i < roots.size()) {
            std::size_t jx = i + 1;
            double last = roots[i].t;
            while (jx < roots.size() && roots[jx].t - last <= tol.event_time) {
                last = roots[jx].t;
                ++jx;
            }
            double sum = 0.0;
            std::vector<int> sites;
            for (std::size_t q = i; q < jx; ++q) {
                sum += roots[q].t;
                sites.push_back(roots[q].site);
            }
            std::sort(sites.begin(), sites.end());
            sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
            clusters.emplace_back(sum / static_cast<double>(jx - i), std::move(sites));
            i = jx;
        }
    }

    // 3. resolve each cluster into runs and apply the conservation rule
    for (std::size_t ci = 0; ci < clusters.size(); ++ci) {
        const double t_star = clusters[ci].first;
        const double t_prev = (ci == 0) ? tr.times.front() : clusters[ci - 1].first;
        const double t_next = (ci + 1 == clusters.size()) ? tr.times.back() : clusters[ci + 1].first;
        const double t_b = 0.5 * (t_prev + t_star);
        const double t_a = 0.5 * (t_star + t_next);

        const auto prof_star = trk.profile_at(t_star);
        const auto prof_b = trk.profile_at(t_b);
        const auto prof_a = trk.profile_at(t_a);

        std::vector<char> zs(n, 0);
        int zero_count = 0;
        for (int j = 0; j < n; ++j)
            if (std::abs(prof_star[j]) <= trk.run_tol) {
                zs[j] = 1;
                ++zero_count;
            }
        if (zero_count == 0) continue;
        if (zero_count == n)
            throw config_error("track_zero_events: profile vanished across the period");

        for (int j = 0; j < n; ++j) {
            if (!zs[j] || zs[mod_index(j - 1, n)]) continue; // not a run start
            int k = 1;
            while (zs[mod_index(j + k, n)]) ++k;
            const int s0 = j;

            const int sigma_l = snapped_sign(prof_star[mod_index(s0 - 1, n)], trk.run_tol);
            const int sigma_r = snapped_sign(prof_star[mod_index(s0 + k, n)], trk.run_tol);

            // window cells s0-1 .. s0+k-1, local index i = 0..k
            std::vector<int> z_b(k + 1), z_a(k + 1);
            auto cell_state = [&](const std::vector<double>& prof, int i) {
                const int sa = snapped_sign(prof[mod_index(s0 - 1 + i, n)], trk.tol_abs);
                const int sb = snapped_sign(prof[mod_index(s0 + i, n)], trk.tol_abs);
                if (sa == 0 && sb == 0)
                    throw audit_error("track_zero_events: ambiguous profile near event");
                return (sa == 0 || sa * sb < 0) ? 1 : 0;
            };
            for (int i = 0; i <= k; ++i) {
                z_b[i] = cell_state(prof_b, i);
                z_a[i] = cell_state(prof_a, i);
            }
            if (z_b == z_a) {
                // grazing double passage inside one cluster; no net change
                led.tangencies.push_back({t_star, s0, 0.0});
                continue;
            }

            int S = 0;
            for (int v : z_b) S += v;

            std::vector<int> dinc(k + 1, 0);
            for (int i = 0; i <= k; ++i) dinc[i] = z_b[i] - z_a[i];

            int direction = 0;
            if (S == k + 1) {
                // fully alternating approach: every lost zero dies in its own cell
            } else if (S == k && z_b[0] == 1) {
                // one interior gap: the boundary zero travels right and the
                // relocated death lands at the gap
                int g = -1;
                for (int i = 1; i <= k; ++i)
                    if (z_b[i] == 0) g = i;
                if (g < 0) throw audit_error("track_zero_events: gap cell missing");
                for (int i = 1; i <= g; ++i)
                    led.crossings[mod_index(s0 - 1 + i, n)] += 1;
                dinc[g] += 1;
                dinc[0] -= 1;
                direction = 1;
            } else if (S == k && z_b[0] == 0) {
                // mirrored passage: the zero travels left out of the run
                for (int i = 1; i <= k; ++i)
                    led.crossings[mod_index(s0 - 1 + i, n)] -= 1;
                dinc[0] += 1;
                dinc[k] -= 1;
                direction = -1;
            } else {
                throw audit_error("track_zero_events: unbalanced event window");
            }

            int window_deaths = 0, run_deaths = 0;
            for (int i = 0; i <= k; ++i) {
                if (dinc[i] < 0)
                    throw audit_error("track_zero_events: negative death count");
                led.deaths[mod_index(s0 - 1 + i, n)] += dinc[i];
                window_deaths += dinc[i];
                if (i >= 1) run_deaths += dinc[i];
            }

            ZeroEvent ev;
            ev.t = t_star;
            ev.site = s0;
            ev.degree = k;
            ev.direction = direction;
            const bool singular = (k >= 2) || (sigma_l == sigma_r);
            ev.kind = singular ? EventKind::disappearance : EventKind::crossing;
            ev.type = !singular             ? SingularType::none
                      : (sigma_l == sigma_r) ? SingularType::type_two
                                             : SingularType::type_one;
            ev.count = !singular ? 0 : (ev.type == SingularType::type_two ? k : k - 1);
            if (ev.count != run_deaths)
                throw audit_error("track_zero_events: event count mismatch");
            ev.before_window = S;
            int at = 0;
            for (int i = 0; i <= k; ++i) {
                const int sa = snapped_sign(prof_star[mod_index(s0 - 1 + i, n)], trk.run_tol);
                const int sb = snapped_sign(prof_star[mod_index(s0 + i, n)], trk.run_tol);
                at += (sa == 0 || sa * sb < 0) ? 1 : 0;
            }
            ev.at_window = at;
            int after = 0;
            for (int v : z_a) after += v;
            ev.after_window = after;
            ev.window_deaths = window_deaths;
            led.events.push_back(ev);
        }
    }
    return led;
}

long long window_residual(const ZeroLedger& led, int m, int n) {
    if (!(0 <= m && m < n && n <= 2 * led.n))
        throw config_error("window_residual: bad window");
    long long dz = 0, deaths = 0;
    for (int j = m; j < n; ++j) {
        const int jj = mod_index(j, led.n);
        dz += led.z_end[jj] - led.z_start[jj];
        deaths += led.deaths[jj];
    }
    const long long cm = led.crossings[mod_index(m, led.n)];
    const long long cn = led.crossings[mod_index(n, led.n)];
    return dz - cm + cn + deaths;
}

AuditReport zero_balance_audit(const ZeroLedger& led) {
    AuditReport rep;
    rep.balanced = true;
    for (int m = 0; m < led.n; ++m) {
        for (int n = m + 1; n <= led.n; ++n) {
            const long long r = window_residual(led, m, n);
            if (std::llabs(r) > rep.max_abs_residual) {
                rep.max_abs_residual = std::llabs(r);
                rep.worst_m = m;
                rep.worst_n = n;
            }
            if (r != 0) rep.balanced = false;
        }
    }
    rep.full_window_residual = window_residual(led, 0, led.n);
    return rep;
}

void write_zero_ledger_csv(const ZeroLedger& led, std::ostream& out) {
    out << "t,site,kind,degree,type,delta_z\n";
    char buf[64];
    for (const auto& ev : led.events) {
        std::snprintf(buf, sizeof buf, "%.17g", ev.t);
        const char* kind = ev.kind == EventKind::crossing ? "crossing" : "disappearance";
        const char* type = ev.type == SingularType::none       ? "none"
                           : ev.type == SingularType::type_one ? "I"
                                                               : "II";
        out << buf << ',' << ev.site << ',' << kind << ',' << ev.degree << ',' << type << ','
            << (ev.after_window - ev.before_window) << '\n';
    }
}

} // namespace fk
