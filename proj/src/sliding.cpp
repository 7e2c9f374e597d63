#include "fk/sliding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "fk/errors.hpp"

namespace fk {

namespace {

// cubic Hermite evaluation of a sampled trajectory; slopes come from the
// equation of motion at the stored states, so no extra storage is needed
struct TrajEval {
    const Trajectory& tr;
    const Potential& pot;
    double f_value;

    std::vector<double> state_at(double t) const {
        const auto& ts = tr.times;
        if (t <= ts.front()) return tr.states.front().u;
        if (t >= ts.back()) return tr.states.back().u;
        const auto it = std::upper_bound(ts.begin(), ts.end(), t);
        const std::size_t k = static_cast<std::size_t>(it - ts.begin()) - 1;
        const double h = ts[k + 1] - ts[k];
        const double s = (t - ts[k]) / h;
        const auto f0 = tr.states[k].u;
        const auto f1 = tr.states[k + 1].u;
        const auto g0 = vector_field(tr.states[k], pot, f_value);
        const auto g1 = vector_field(tr.states[k + 1], pot, f_value);
        std::vector<double> out(f0.size());
        for (std::size_t j = 0; j < f0.size(); ++j) {
            const double a = 2.0 * f0[j] + h * g0[j] - 2.0 * f1[j] + h * g1[j];
            const double b = -3.0 * f0[j] - 2.0 * h * g0[j] + 3.0 * f1[j] - h * g1[j];
            out[j] = ((a * s + b) * s + h * g0[j]) * s + f0[j];
        }
        return out;
    }
};

double frac(double x) { return x - std::floor(x); }

} // namespace

SpeedEstimate average_speed(const Trajectory& tr) {
    const std::size_t n_samples = tr.times.size();
    if (n_samples < 3 || tr.states.size() != n_samples)
        throw config_error("average_speed: need at least three samples");
    const int n = tr.states.front().n;

    double t_mean = 0.0;
    for (double t : tr.times) t_mean += t;
    t_mean /= static_cast<double>(n_samples);
    double t_var = 0.0;
    for (double t : tr.times) t_var += (t - t_mean) * (t - t_mean);
    if (t_var == 0.0) throw config_error("average_speed: degenerate time axis");

    SpeedEstimate est;
    double lo = 0.0, hi = 0.0;
    for (int j = 0; j < n; ++j) {
        double u_mean = 0.0;
        for (const auto& s : tr.states) u_mean += s.u[j];
        u_mean /= static_cast<double>(n_samples);
        double cov = 0.0;
        for (std::size_t k = 0; k < n_samples; ++k)
            cov += (tr.times[k] - t_mean) * (tr.states[k].u[j] - u_mean);
        const double slope = cov / t_var;
        if (j == 0) {
            est.v = slope;
            lo = hi = slope;
        } else {
            lo = std::min(lo, slope);
            hi = std::max(hi, slope);
        }
    }
    est.site_spread = hi - lo;
    return est;
}

AsymptoticsReport classify_asymptotics(const ChainState& s, const Potential& pot,
                                       const Forcing& force, double horizon,
                                       const SlideTolerances& tol, const IntegrateOptions& opt) {
    validate_state(s);
    if (force.kind != Forcing::Kind::dc)
        throw config_error("classify_asymptotics: constant forcing required");
    if (!(horizon > 0.0)) throw config_error("classify_asymptotics: horizon must be positive");

    const auto full = integrate(s, pot, force, s.t, s.t + horizon, opt);

    AsymptoticsReport rep;
    rep.final_state = full.states.back();

    const double t_half = s.t + 0.5 * horizon;
    for (std::size_t k = 0; k < full.times.size(); ++k) {
        if (full.times[k] < t_half) continue;
        rep.tail.times.push_back(full.times[k]);
        rep.tail.states.push_back(full.states[k]);
    }
    if (rep.tail.times.size() < 8)
        throw config_error("classify_asymptotics: too few tail samples, lower dt_out");

    const auto speed = average_speed(rep.tail);
    rep.v = speed.v;
    rep.site_spread = speed.site_spread;

    // rest test: sup speed sustained below tol_eq over the closing fifth
    const std::size_t n_tail = rep.tail.times.size();
    const std::size_t eq_from = n_tail - std::max<std::size_t>(5, n_tail / 5);
    double sup_speed = 0.0;
    for (std::size_t k = eq_from; k < n_tail; ++k) {
        const auto rhs = vector_field(rep.tail.states[k], pot, force.mean);
        for (double x : rhs) sup_speed = std::max(sup_speed, std::abs(x));
    }
    rep.residual_eq = sup_speed;
    if (sup_speed < tol.tol_eq) {
        rep.verdict = Verdict::equilibrium;
        return rep;
    }

    // unit-cell periodicity test around the drift-rate prediction; the site
    // spread stays diagnostic only, since least-squares slopes on a finite
    // window of a genuine wave already differ by O(amplitude / span)
    const double v_abs = std::abs(rep.v);
    const double span = rep.tail.times.back() - rep.tail.times.front();
    if (v_abs < tol.tol_v || span * v_abs < 1.4)
        return rep; // undetermined: no usable period candidate in the window

    const double shift = rep.v > 0.0 ? 1.0 : -1.0;
    const TrajEval eval{rep.tail, pot, force.mean};
    const double t_ref = rep.tail.times.front();
    const auto u_ref = rep.tail.states.front().u;

    auto defect = [&](double tau) {
        const auto u = eval.state_at(t_ref + tau);
        double worst = 0.0;
        for (std::size_t j = 0; j < u.size(); ++j)
            worst = std::max(worst, std::abs(u[j] - u_ref[j] - shift));
        return worst;
    };

    const double tau_lo = 0.7 / v_abs, tau_hi = std::min(1.3 / v_abs, span - 1e-9);
    const int grid = 240;
    int best_k = 0;
    double best_m = defect(tau_lo);
    for (int k = 1; k <= grid; ++k) {
        const double tau = tau_lo + (tau_hi - tau_lo) * k / grid;
        const double m = defect(tau);
        if (m < best_m) {
            best_m = m;
            best_k = k;
        }
    }
    const double step = (tau_hi - tau_lo) / grid;
    double a = tau_lo + step * std::max(0, best_k - 1);
    double b = std::min(tau_hi, a + 2.0 * step);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = defect(x1), f2 = defect(x2);
    for (int it = 0; it < 80; ++it) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = defect(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = defect(x2);
        }
    }
    const double tau_star = f1 < f2 ? x1 : x2;
    rep.residual_per = std::min(f1, f2);
    // confirm at the doubled period when the window allows it, so a single
    // accidental recurrence cannot pass as periodic sliding
    if (rep.residual_per < tol.tol_per && 2.0 * tau_star <= span) {
        const auto u2 = eval.state_at(t_ref + 2.0 * tau_star);
        double worst2 = 0.0;
        for (std::size_t j = 0; j < u2.size(); ++j)
            worst2 = std::max(worst2, std::abs(u2[j] - u_ref[j] - 2.0 * shift));
        if (worst2 >= 10.0 * tol.tol_per) rep.residual_per = worst2;
    }
    if (rep.residual_per < tol.tol_per) {
        rep.verdict = Verdict::periodic_sliding;
        rep.t0 = tau_star;
        // drift rate as displacement over whole periods: unlike the raw
        // least-squares slope this carries no fractional-period bias, and it
        // only agrees with 1/t0 when the window really is periodic
        const auto k_per = static_cast<long long>(std::floor(span / tau_star));
        const double gap = static_cast<double>(k_per) * tau_star;
        const auto u_far = eval.state_at(t_ref + gap);
        rep.v = (u_far[0] - u_ref[0]) / gap;
    }
    return rep;
}

ModulationTable extract_modulation(const Trajectory& tr, double rho, double v, int bins,
                                   double tol_m) {
    if (tr.times.size() < 16) throw config_error("extract_modulation: too few samples");
    if (bins < 8) throw config_error("extract_modulation: too few bins");
    const int n = tr.states.front().n;

    // hull offset from the zero-mean convention
    double alpha = 0.0;
    std::size_t count_all = 0;
    for (std::size_t k = 0; k < tr.times.size(); ++k)
        for (int j = 0; j < n; ++j) {
            alpha += tr.states[k].u[j] - rho * j - v * tr.times[k];
            ++count_all;
        }
    alpha /= static_cast<double>(count_all);

    ModulationTable tab;
    tab.rho = rho;
    tab.v = v;
    tab.alpha = alpha;
    tab.x.resize(bins);
    tab.m.assign(bins, 0.0);
    tab.count.assign(bins, 0);
    tab.spread.assign(bins, 0.0);
    for (int b = 0; b < bins; ++b) tab.x[b] = (b + 0.5) / bins;

    // per-bin linear fit of m against x; the fitted center value is the hull
    std::vector<double> sx(bins, 0.0), sy(bins, 0.0), sxx(bins, 0.0), sxy(bins, 0.0),
        syy(bins, 0.0);
    for (std::size_t k = 0; k < tr.times.size(); ++k)
        for (int j = 0; j < n; ++j) {
            const double theta = rho * j + v * tr.times[k] + alpha;
            const double y = tr.states[k].u[j] - theta;
            const double xf = frac(theta);
            int b = std::min(bins - 1, static_cast<int>(xf * bins));
            double dx = xf - tab.x[b];
            if (dx > 0.5 / bins) dx -= 1.0; // guard the wrap bin
            sx[b] += dx;
            sy[b] += y;
            sxx[b] += dx * dx;
            sxy[b] += dx * y;
            syy[b] += y * y;
            tab.count[b] += 1;
        }

    // A slope is only trustworthy when the bin's own x coverage carries real
    // width; resonant sampling can drop every sample onto one spot, and a fit
    // through such a cluster extrapolates noise to the bin center.  Those
    // bins borrow the two neighbours (moments re-centered by +-h), which
    // turns the extrapolation into an interpolation.
    const double h = 1.0 / bins;
    const double var_floor = h * h / 48.0;
    for (int b = 0; b < bins; ++b) {
        if (tab.count[b] == 0) continue;
        double c = tab.count[b], mx = sx[b], my = sy[b], mxx = sxx[b], mxy = sxy[b];
        if ((mxx - mx * mx / c) / c < var_floor) {
            for (int d : {-1, +1}) {
                const int nb = (b + d + bins) % bins;
                if (tab.count[nb] == 0) continue;
                const double cn = tab.count[nb];
                const double off = d * h;
                c += cn;
                mx += sx[nb] + cn * off;
                my += sy[nb];
                mxx += sxx[nb] + 2.0 * off * sx[nb] + cn * off * off;
                mxy += sxy[nb] + off * sy[nb];
            }
        }
        double slope = 0.0;
        const double det = c * mxx - mx * mx;
        if (c >= 2.0 && det > c * c * var_floor) slope = (c * mxy - mx * my) / det;
        const double intercept = (my - slope * mx) / c;
        tab.m[b] = intercept;
        // rms of this bin's own samples about the fitted line
        const double cb = tab.count[b];
        const double ss = syy[b] - 2.0 * intercept * sy[b] - 2.0 * slope * sxy[b] +
                          cb * intercept * intercept + 2.0 * slope * intercept * sx[b] +
                          slope * slope * sxx[b];
        tab.spread[b] = std::sqrt(std::max(0.0, ss / cb));
        if (tab.count[b] >= 4) tab.residual = std::max(tab.residual, tab.spread[b]);
    }

    // fill empty bins by periodic linear interpolation between neighbours
    for (int b = 0; b < bins; ++b) {
        if (tab.count[b] != 0) continue;
        int l = b, r = b, dl = 0, dr = 0;
        while (tab.count[(l + bins - 1) % bins] == 0 && dl < bins) ++dl, l = (l + bins - 1) % bins;
        while (tab.count[(r + 1) % bins] == 0 && dr < bins) ++dr, r = (r + 1) % bins;
        l = (l + bins - 1) % bins;
        r = (r + 1) % bins;
        if (tab.count[l] == 0 || tab.count[r] == 0)
            throw audit_error("extract_modulation: every bin is empty");
        const double width = dl + dr + 2.0;
        tab.m[b] = (tab.m[l] * (dr + 1.0) + tab.m[r] * (dl + 1.0)) / width;
    }

    // fix the phase by the mean(m) = 0 convention.  Moving c into alpha is a
    // reparametrization theta -> theta + c, so the hull must be read at the
    // shifted argument: m_new(x) = m_old(x - c) - c, done by periodic
    // resampling of the table (c is tiny, so the interpolation is exact to
    // O(c^2) and reconstruction is preserved).
    double m_mean = 0.0;
    for (int b = 0; b < bins; ++b) m_mean += tab.m[b];
    m_mean /= bins;
    {
        const std::vector<double> m0 = tab.m;
        for (int b = 0; b < bins; ++b) {
            double pos = (tab.x[b] - m_mean - 0.5 * h) / h;
            pos -= std::floor(pos / bins) * bins;
            const int b0 = static_cast<int>(pos) % bins;
            const int b1 = (b0 + 1) % bins;
            const double wgt = pos - std::floor(pos);
            tab.m[b] = (1.0 - wgt) * m0[b0] + wgt * m0[b1] - m_mean;
        }
    }
    tab.alpha += m_mean;

    if (tab.residual > tol_m)
        throw audit_error("extract_modulation: samples are not a sliding state at this (rho, v)");
    return tab;
}

double modulation_reconstruction_error(const Trajectory& tr, const ModulationTable& tab) {
    const int bins = static_cast<int>(tab.x.size());
    const int n = tr.states.front().n;
    auto hull = [&](double xf) {
        const double pos = xf * bins - 0.5;
        const int b0 = static_cast<int>(std::floor(pos));
        const double s = pos - b0;
        const int lo = ((b0 % bins) + bins) % bins;
        const int hi = (lo + 1) % bins;
        return (1.0 - s) * tab.m[lo] + s * tab.m[hi];
    };
    double worst = 0.0;
    for (std::size_t k = 0; k < tr.times.size(); ++k)
        for (int j = 0; j < n; ++j) {
            const double theta = tab.rho * j + tab.v * tr.times[k] + tab.alpha;
            const double fit = theta + hull(frac(theta));
            worst = std::max(worst, std::abs(tr.states[k].u[j] - fit));
        }
    return worst;
}

double dissipation_residual(const DissipationTrace& trace, const Potential& pot,
                            const Forcing& force, const AsymptoticsReport& rep) {
    if (force.kind != Forcing::Kind::dc)
        throw config_error("dissipation_residual: constant forcing required");
    if (trace.traj.times.size() < 4 || trace.q.size() != trace.traj.times.size())
        throw config_error("dissipation_residual: inconsistent trace");
    const double f_value = force.mean;

    const double t_end = trace.traj.times.back();
    const double t_begin = trace.traj.times.front();
    double ta = t_begin, v = rep.v;

    if (rep.verdict == Verdict::periodic_sliding) {
        // integer period count removes the phase bias of the window average
        const auto k_per = static_cast<long long>(std::floor((t_end - t_begin) / rep.t0));
        if (k_per < 1) throw config_error("dissipation_residual: trace shorter than one period");
        ta = t_end - static_cast<double>(k_per) * rep.t0;
        v = (rep.v > 0.0 ? 1.0 : -1.0) / rep.t0;
    }

    // Hermite interpolation of q at ta; dq/dt is the site-mean squared speed
    auto qdot = [&](std::size_t k) {
        const auto rhs = vector_field(trace.traj.states[k], pot, f_value);
        double acc = 0.0;
        for (double x : rhs) acc += x * x;
        return acc / static_cast<double>(rhs.size());
    };
    double q_a;
    if (ta <= t_begin) {
        q_a = trace.q.front();
        ta = t_begin;
    } else {
        const auto it = std::upper_bound(trace.traj.times.begin(), trace.traj.times.end(), ta);
        const std::size_t k = static_cast<std::size_t>(it - trace.traj.times.begin()) - 1;
        const double h = trace.traj.times[k + 1] - trace.traj.times[k];
        const double s = (ta - trace.traj.times[k]) / h;
        const double f0 = trace.q[k], f1 = trace.q[k + 1];
        const double g0 = h * qdot(k), g1 = h * qdot(k + 1);
        const double a = 2.0 * f0 + g0 - 2.0 * f1 + g1;
        const double b = -3.0 * f0 - 2.0 * g0 + 3.0 * f1 - g1;
        q_a = ((a * s + b) * s + g0) * s + f0;
    }

    const double mean_sq = (trace.q.back() - q_a) / (t_end - ta);
    const double lhs = f_value * v;
    return std::abs(lhs - mean_sq) / std::max(std::abs(lhs), 1e-6);
}

DepinSweep depinning_sweep(const Potential& pot, int n, int m,
                           const std::vector<double>& f_grid, double horizon,
                           const SlideTolerances& tol, const IntegrateOptions& opt) {
    if (f_grid.empty()) throw config_error("depinning_sweep: empty drive grid");
    for (std::size_t i = 1; i < f_grid.size(); ++i)
        if (!(f_grid[i] > f_grid[i - 1]))
            throw config_error("depinning_sweep: drive grid must ascend");
    if (n < 1) throw config_error("depinning_sweep: bad period");

    ChainState state;
    state.n = n;
    state.m = m;
    state.u.resize(n);
    for (int j = 0; j < n; ++j) state.u[j] = static_cast<double>(m) * j / n;

    DepinSweep sweep;
    double prev_f = f_grid.front();
    for (double f : f_grid) {
        const auto force = dc_forcing(f);
        const auto rep = classify_asymptotics(state, pot, force, horizon, tol, opt);

        DepinPoint pt;
        pt.f = f;
        pt.verdict = rep.verdict;
        pt.v = rep.verdict == Verdict::equilibrium ? 0.0 : rep.v;
        pt.t0 = rep.verdict == Verdict::periodic_sliding ? rep.t0 : 0.0;

        const double window =
            rep.verdict == Verdict::periodic_sliding ? 6.0 * rep.t0 : 5.0;
        const auto trace = integrate_with_dissipation(rep.final_state, pot, force,
                                                      rep.final_state.t,
                                                      rep.final_state.t + window, opt);
        pt.residual_dissipation = dissipation_residual(trace, pot, force, rep);
        sweep.points.push_back(pt);

        if (!sweep.f_c_found && rep.verdict == Verdict::periodic_sliding) {
            sweep.f_c = (f == f_grid.front()) ? f : 0.5 * (prev_f + f);
            sweep.f_c_found = true;
        }
        state = rep.final_state; // warm start for the next drive value
        prev_f = f;
    }
    for (std::size_t i = 1; i < sweep.points.size(); ++i)
        if (sweep.points[i].v < sweep.points[i - 1].v - tol.tol_v) sweep.monotone_ok = false;
    return sweep;
}

void write_depin_csv(const DepinSweep& sweep, std::ostream& out) {
    out << "F,v,verdict,t0,residual_dissipation\n";
    char buf[256];
    for (const auto& pt : sweep.points) {
        const char* verdict = pt.verdict == Verdict::equilibrium       ? "equilibrium"
                              : pt.verdict == Verdict::periodic_sliding ? "periodic_sliding"
                                                                        : "undetermined";
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%s,%.17g,%.17g\n", pt.f, pt.v, verdict,
                      pt.t0, pt.residual_dissipation);
        out << buf;
    }
}

double attractor_residence(const Ensemble& mu, const std::vector<ChainState>& a_hat,
                           const Potential& pot, const Forcing& force, double s_max,
                           double eps, int n_time_samples, const IntegrateOptions& opt) {
    if (a_hat.empty()) throw config_error("attractor_residence: empty reference set");
    if (!(s_max > 0.0)) throw config_error("attractor_residence: horizon must be positive");
    if (n_time_samples < 1) throw config_error("attractor_residence: need time samples");
    if (!(eps > 0.0)) throw config_error("attractor_residence: radius must be positive");

    IntegrateOptions sample_opt = opt;
    sample_opt.dt_out = s_max / n_time_samples;

    double fraction = 0.0;
    for (const auto& mem : mu.members) {
        const auto tr = integrate(mem.state, pot, force, mem.state.t,
                                  mem.state.t + s_max, sample_opt);
        std::size_t hits = 0, total = 0;
        for (const auto& st : tr.states) {
            ++total;
            for (const auto& ref : a_hat) {
                if (config_distance(st, ref) < eps) {
                    ++hits;
                    break;
                }
            }
        }
        fraction += mem.weight * static_cast<double>(hits) / static_cast<double>(total);
    }
    return fraction;
}

std::vector<ChainState> close_under_translation(const std::vector<ChainState>& states) {
    std::vector<ChainState> out;
    for (const auto& s : states)
        for (int p = 0; p < s.n; ++p) out.push_back(translate(s, p, 0));
    return out;
}

} // namespace fk
