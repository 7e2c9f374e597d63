#include "fk/aubry_mather.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <ostream>
#include <string>

#include "fk/errors.hpp"
#include "fk/integrate.hpp"
#include "fk/zeroset.hpp"

namespace fk {

Rational rotation_number(const ChainState& s) {
    validate_state(s);
    Rational r;
    if (s.m == 0) return r; // 0/1
    const long long g = std::gcd(static_cast<long long>(std::abs(s.m)),
                                 static_cast<long long>(s.n));
    r.num = s.m / g;
    r.den = s.n / g;
    return r;
}

std::vector<Rational> convergents(double x, long long q_max) {
    if (!std::isfinite(x)) throw config_error("convergents: target must be finite");
    if (q_max < 1) throw config_error("convergents: q_max must be positive");

    std::vector<Rational> out;
    long long h0 = 1, h1 = static_cast<long long>(std::floor(x));
    long long k0 = 0, k1 = 1;
    out.push_back({h1, 1});
    double frac = x - std::floor(x);
    for (int it = 0; it < 64 && frac > 1e-15; ++it) {
        const double inv = 1.0 / frac;
        const double a_real = std::floor(inv);
        if (a_real > 9.0e15) break;
        const auto a = static_cast<long long>(a_real);
        const long long h2 = a * h1 + h0;
        const long long k2 = a * k1 + k0;
        if (k2 > q_max) break;
        out.push_back({h2, k2});
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        frac = inv - a_real;
    }
    return out;
}

OrderednessReport ordered_check(const ChainState& s, int max_p, double tol) {
    validate_state(s);
    if (max_p < 1) throw config_error("ordered_check: max_p must be positive");

    const double rho = static_cast<double>(s.m) / s.n;
    OrderednessReport rep;

    double h_lo = s.u[0], h_hi = s.u[0];
    for (int j = 1; j < s.n; ++j) {
        const double h = s.u[j] - rho * j;
        h_lo = std::min(h_lo, h);
        h_hi = std::max(h_hi, h);
    }
    rep.width = h_hi - h_lo;

    // d_j = u_{j+p} + q - u_j = p*rho + q + (h_{j+p} - h_j) with h n-periodic,
    // so sign changes require |p*rho + q| <= width; other q are comparable for free
    for (long long p = -max_p; p <= max_p; ++p) {
        const auto q_lo = static_cast<long long>(std::ceil(-p * rho - rep.width)) - 1;
        const auto q_hi = static_cast<long long>(std::floor(-p * rho + rep.width)) + 1;
        for (long long q = q_lo; q <= q_hi; ++q) {
            if (p == 0 && q == 0) continue;
            double pos = 0.0, neg = 0.0;
            for (int j = 0; j < s.n; ++j) {
                const double d = s.site(j + p) + static_cast<double>(q) - s.u[j];
                pos = std::max(pos, d);
                neg = std::max(neg, -d);
            }
            if (pos > tol && neg > tol) {
                rep.ordered = false;
                const double violation = std::min(pos, neg);
                if (violation > rep.violation) {
                    rep.violation = violation;
                    rep.worst_p = p;
                    rep.worst_q = q;
                }
            }
        }
    }
    return rep;
}

CylinderPoint project_cylinder(const ChainState& s) {
    validate_state(s);
    CylinderPoint pt;
    pt.x = s.u[0] - std::floor(s.u[0]);
    pt.p = s.site(1) - s.u[0];
    return pt;
}

double cylinder_distance(const CylinderPoint& a, const CylinderPoint& b) {
    const double dx = a.x - b.x;
    const double circ = std::min({std::abs(dx), std::abs(dx + 1.0), std::abs(dx - 1.0)});
    return circ + std::abs(a.p - b.p);
}

namespace {

// scan u - v (+ integer shifts) for zero runs that are not simple crossings;
// works on the extended lattice so unequal windings are fine
bool has_singular_zero(const ChainState& a, const ChainState& b) {
    const std::int64_t l = std::lcm<std::int64_t>(a.n, b.n);
    std::vector<double> w(static_cast<std::size_t>(l) + 3);
    double w_lo = 0.0, w_hi = 0.0, scale = 1.0;
    for (std::int64_t i = -1; i <= l + 1; ++i) {
        const double val = a.site(i) - b.site(i);
        w[static_cast<std::size_t>(i + 1)] = val;
        w_lo = std::min(w_lo, val);
        w_hi = std::max(w_hi, val);
        scale = std::max(scale, std::abs(val));
    }
    const double tol = 1e-10 * scale;
    const auto at = [&](std::int64_t i) { return w[static_cast<std::size_t>(i + 1)]; };

    const auto r_lo = static_cast<std::int64_t>(std::floor(-w_hi)) - 1;
    const auto r_hi = static_cast<std::int64_t>(std::ceil(-w_lo)) + 1;
    for (std::int64_t r = r_lo; r <= r_hi; ++r) {
        for (std::int64_t i = 0; i < l; ++i) {
            const double v0 = at(i) + static_cast<double>(r);
            if (std::abs(v0) > tol) continue;
            if (std::abs(at(i - 1) + static_cast<double>(r)) <= tol)
                continue; // interior of a run; handled at its start
            std::int64_t k = 1;
            while (i + k <= l && std::abs(at(i + k) + static_cast<double>(r)) <= tol) ++k;
            if (k >= 2) return true;
            const double left = at(i - 1) + static_cast<double>(r);
            const double right = at(i + 1) + static_cast<double>(r);
            if (left * right > 0.0) return true; // equal flanks around one zero
        }
    }
    return false;
}

} // namespace

InjectivityReport injectivity_diagnostic(const std::vector<ChainState>& samples,
                                         double eps_config, double eps_proj) {
    if (samples.size() < 2)
        throw config_error("injectivity_diagnostic: need at least two samples");
    InjectivityReport rep;
    bool any = false;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        for (std::size_t j = i + 1; j < samples.size(); ++j) {
            if (config_distance(samples[i], samples[j]) <= eps_config) continue;
            ++rep.checked_pairs;
            const double gap =
                cylinder_distance(project_cylinder(samples[i]), project_cylinder(samples[j]));
            if (!any || gap < rep.min_projection_gap) {
                rep.min_projection_gap = gap;
                rep.worst_a = static_cast<int>(i);
                rep.worst_b = static_cast<int>(j);
                any = true;
            }
            if (gap < eps_proj) ++rep.violations;
            if (has_singular_zero(samples[i], samples[j])) ++rep.singular_pairs;
        }
    }
    return rep;
}

std::vector<CharacteristicRow> characteristic_map_samples(
    const std::vector<ChainState>& samples, const Potential& pot, const Forcing& force,
    double dc_dt, const IntegrateOptions& opt) {
    const double delta = force.kind == Forcing::Kind::dc ? dc_dt : 1.0;
    if (!(delta > 0.0)) throw config_error("characteristic_map_samples: time step must be positive");

    std::vector<CharacteristicRow> rows;
    rows.reserve(samples.size());
    for (const auto& s : samples) {
        CharacteristicRow row;
        const auto base = project_cylinder(s);
        const auto trans = project_cylinder(translate(s, 1, 0));
        const auto flow = project_cylinder(
            integrate(s, pot, force, s.t, s.t + delta, opt).states.back());
        row.x = base.x;
        row.p = base.p;
        row.x_t = trans.x;
        row.p_t = trans.p;
        row.x_phi = flow.x;
        row.p_phi = flow.p;
        rows.push_back(row);
    }
    return rows;
}

void write_characteristic_csv(const std::vector<CharacteristicRow>& rows, std::ostream& out) {
    out << "x,p,x_T,p_T,x_phi,p_phi\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.x, r.p, r.x_t,
                      r.p_t, r.x_phi, r.p_phi);
        out << buf;
    }
}

OrderedInvariant construct_ordered_invariant(long long num, long long den,
                                             const Potential& pot, const Forcing& force,
                                             int n_avg, double transient,
                                             const SlideTolerances& tol,
                                             const IntegrateOptions& opt) {
    if (den < 1) throw config_error("construct_ordered_invariant: denominator must be positive");
    if (n_avg < 1) throw config_error("construct_ordered_invariant: n_avg must be positive");
    if (!(transient > 0.0))
        throw config_error("construct_ordered_invariant: transient must be positive");

    const long long g = std::gcd(std::llabs(num), den);
    const long long p = num / (g == 0 ? 1 : g);
    const long long q = den / (g == 0 ? 1 : g);
    if (q > 4096) throw config_error("construct_ordered_invariant: period too large");

    ChainState seed;
    seed.n = static_cast<int>(q);
    seed.m = static_cast<int>(p);
    seed.u.resize(seed.n);
    const double rho = static_cast<double>(p) / static_cast<double>(q);
    for (int j = 0; j < seed.n; ++j) seed.u[j] = rho * j;

    OrderedInvariant out;
    if (force.kind == Forcing::Kind::dc) {
        const auto rep = classify_asymptotics(seed, pot, force, transient, tol, opt);
        out.verdict = rep.verdict;
        if (rep.verdict == Verdict::equilibrium) {
            out.ensemble = make_ensemble({{rep.final_state, 1.0}});
        } else if (rep.verdict == Verdict::periodic_sliding) {
            out.t0 = rep.t0;
            // equal weights sample the closed orbit exactly once around
            IntegrateOptions sample = opt;
            sample.dt_out = rep.t0 / n_avg;
            const auto orbit = integrate(rep.final_state, pot, force, rep.final_state.t,
                                         rep.final_state.t + rep.t0, sample);
            std::vector<Ensemble::Member> members;
            for (int k = 0; k < n_avg && k < static_cast<int>(orbit.states.size()); ++k)
                members.push_back({orbit.states[k], 1.0 / n_avg});
            out.ensemble = make_ensemble(std::move(members));
        } else {
            const auto start = make_ensemble({{rep.final_state, 1.0}});
            out.ensemble =
                krylov_bogolyubov(start, pot, force, n_avg, std::min(n_avg, 63), opt);
        }
    } else {
        auto start = make_ensemble({{seed, 1.0}});
        start = evolve_ensemble(start, pot, force, std::ceil(transient), opt);
        out.ensemble = krylov_bogolyubov(start, pot, force, n_avg, 1, opt);
    }

    const int reach = std::max(2 * seed.n, 8);
    for (std::size_t idx = 0; idx < out.ensemble.members.size(); ++idx) {
        const auto member_rep = ordered_check(out.ensemble.members[idx].state, reach);
        if (!member_rep.ordered)
            throw audit_error("construct_ordered_invariant: member " + std::to_string(idx) +
                              " left the ordered class");
        if (member_rep.width > out.orderedness.width) out.orderedness.width = member_rep.width;
        if (member_rep.violation > out.orderedness.violation) {
            out.orderedness.violation = member_rep.violation;
            out.orderedness.worst_p = member_rep.worst_p;
            out.orderedness.worst_q = member_rep.worst_q;
        }
    }
    out.defect = invariance_defect(out.ensemble, pot, force, 1.0, opt);
    return out;
}

} // namespace fk
