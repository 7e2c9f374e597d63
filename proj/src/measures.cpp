#include "fk/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "fk/errors.hpp"
#include "fk/rng.hpp"
#include "fk/zeroset.hpp"

namespace fk {

namespace {

constexpr double weight_tol = 1e-12;

void validate_ensemble(const Ensemble& e) {
    if (e.members.empty()) throw config_error("ensemble: no members");
    double sum = 0.0;
    for (const auto& mem : e.members) {
        validate_state(mem.state);
        if (!(mem.weight > 0.0) || !std::isfinite(mem.weight))
            throw config_error("ensemble: weights must be positive");
        sum += mem.weight;
    }
    if (std::abs(sum - 1.0) > weight_tol)
        throw config_error("ensemble: weights must sum to one");
}

ChainState canonical_rep(ChainState s) {
    const auto q = static_cast<std::int64_t>(std::floor(s.u[0]));
    if (q != 0) s = translate(s, 0, -q);
    return s;
}

// spatial average of pair_intersections over one common period
double pair_mean_intersections(const ChainState& u, const ChainState& v) {
    const std::int64_t l = std::lcm<std::int64_t>(u.n, v.n);
    std::int64_t total = 0;
    for (std::int64_t i = 0; i < l; ++i) total += pair_intersections(u, v, i);
    return static_cast<double>(total) / static_cast<double>(l);
}

std::size_t sample_index(const std::vector<double>& cdf, double x) {
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), x);
    return std::min(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

} // namespace

Ensemble make_ensemble(std::vector<Ensemble::Member> members) {
    if (members.empty()) throw config_error("ensemble: no members");
    double sum = 0.0;
    for (auto& mem : members) {
        validate_state(mem.state);
        if (!(mem.weight > 0.0) || !std::isfinite(mem.weight))
            throw config_error("ensemble: weights must be positive");
        mem.state = canonical_rep(std::move(mem.state));
        sum += mem.weight;
    }
    for (auto& mem : members) mem.weight /= sum;
    Ensemble e;
    e.members = std::move(members);
    return e;
}

Ensemble uniform_ensemble(std::vector<ChainState> states) {
    std::vector<Ensemble::Member> members;
    members.reserve(states.size());
    for (auto& s : states) members.push_back({std::move(s), 1.0});
    return make_ensemble(std::move(members));
}

int pair_intersections(const ChainState& u, const ChainState& v, std::int64_t cell) {
    const double wi = u.site(cell) - v.site(cell);
    const double wj = u.site(cell + 1) - v.site(cell + 1);
    const double tol = 1e-10 * std::max({1.0, std::abs(wi), std::abs(wj)});

    const auto lo = static_cast<std::int64_t>(std::floor(std::min(-wi, -wj))) - 1;
    const auto hi = static_cast<std::int64_t>(std::ceil(std::max(-wi, -wj))) + 1;
    int count = 0;
    for (std::int64_t r = lo; r <= hi; ++r) {
        const int sa = snapped_sign(wi + static_cast<double>(r), tol);
        const int sb = snapped_sign(wj + static_cast<double>(r), tol);
        if (sa == 0 && sb == 0) continue; // u = v + r on the whole cell
        if (sa == 0 || sa * sb < 0) ++count;
    }

    const double spread = std::max(spacing_bound(u), spacing_bound(v));
    const auto n_class = static_cast<std::int64_t>(std::floor(spread)) + 1;
    if (count > 2 * n_class + 1)
        throw audit_error("pair_intersections: count exceeds the spacing bound");
    return count;
}

ZValue z_functional(const Ensemble& a, const Ensemble& b, std::uint64_t seed) {
    validate_ensemble(a);
    validate_ensemble(b);
    ZValue out;

    constexpr std::size_t exact_limit = 64;
    if (a.members.size() <= exact_limit && b.members.size() <= exact_limit) {
        for (const auto& ma : a.members)
            for (const auto& mb : b.members)
                out.value += ma.weight * mb.weight * pair_mean_intersections(ma.state, mb.state);
        return out;
    }

    // weighted pair subsample; repeated pairs are memoized
    constexpr std::size_t n_samples = 4096;
    std::vector<double> cdf_a, cdf_b;
    double acc = 0.0;
    for (const auto& mem : a.members) cdf_a.push_back(acc += mem.weight);
    acc = 0.0;
    for (const auto& mem : b.members) cdf_b.push_back(acc += mem.weight);

    auto rng = seeded_engine(seed, "z_functional.pair_subsample");
    std::unordered_map<std::uint64_t, double> memo;
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t s = 0; s < n_samples; ++s) {
        const std::size_t ia = sample_index(cdf_a, u01(rng));
        const std::size_t ib = sample_index(cdf_b, u01(rng));
        const std::uint64_t key = (static_cast<std::uint64_t>(ia) << 32) | ib;
        auto it = memo.find(key);
        if (it == memo.end())
            it = memo.emplace(key, pair_mean_intersections(a.members[ia].state,
                                                           b.members[ib].state))
                     .first;
        sum += it->second;
        sum_sq += it->second * it->second;
    }
    const auto m = static_cast<double>(n_samples);
    out.value = sum / m;
    const double var = std::max(0.0, (sum_sq - sum * sum / m) / (m - 1.0));
    out.stat_err = std::sqrt(var / m);
    return out;
}

double z_derivative_functional(const Ensemble& e, const Potential& pot, const Forcing& force) {
    validate_ensemble(e);
    if (force.kind != Forcing::Kind::dc)
        throw config_error("z_derivative_functional: periodic forcing unsupported");
    double out = 0.0;
    for (const auto& mem : e.members) {
        const auto w = vector_field(mem.state, pot, force.mean);
        double scale = 1.0;
        for (double x : w) scale = std::max(scale, std::abs(x));
        const double tol = 1e-10 * scale;
        bool all_zero = true;
        for (double x : w)
            if (std::abs(x) > tol) all_zero = false;
        if (all_zero) continue; // resting profile counts as intersection-free
        out += mem.weight * count_zeros(w, tol) / static_cast<double>(mem.state.n);
    }
    return out;
}

Ensemble evolve_ensemble(const Ensemble& e, const Potential& pot, const Forcing& force,
                         double horizon, const IntegrateOptions& opt) {
    validate_ensemble(e);
    if (!(horizon >= 0.0) || !std::isfinite(horizon))
        throw config_error("evolve_ensemble: horizon must be nonnegative");
    if (horizon == 0.0) return e;
    std::vector<Ensemble::Member> members;
    members.reserve(e.members.size());
    for (const auto& mem : e.members) {
        const auto tr =
            integrate(mem.state, pot, force, mem.state.t, mem.state.t + horizon, opt);
        members.push_back({tr.states.back(), mem.weight});
    }
    return make_ensemble(std::move(members));
}

Ensemble krylov_bogolyubov(const Ensemble& seed, const Potential& pot, const Forcing& force,
                           int n_steps, int t_quad, const IntegrateOptions& opt) {
    validate_ensemble(seed);
    if (n_steps < 1) throw config_error("krylov_bogolyubov: n_steps must be positive");
    if (t_quad < 1) throw config_error("krylov_bogolyubov: t_quad must be positive");

    std::vector<Ensemble::Member> members;
    if (force.kind == Forcing::Kind::dc) {
        const double horizon = static_cast<double>(n_steps);
        const double h_quad = horizon / t_quad;
        IntegrateOptions snap = opt;
        snap.dt_out = h_quad;
        for (const auto& mem : seed.members) {
            const auto tr =
                integrate(mem.state, pot, force, mem.state.t, mem.state.t + horizon, snap);
            for (int q = 0; q <= t_quad; ++q) {
                const double node_t = mem.state.t + q * h_quad;
                // snapshots land on the output grid; locate by nearest time
                std::size_t best = 0;
                double best_err = std::abs(tr.times.front() - node_t);
                for (std::size_t k = 1; k < tr.times.size(); ++k) {
                    const double err = std::abs(tr.times[k] - node_t);
                    if (err < best_err) {
                        best_err = err;
                        best = k;
                    }
                }
                if (best_err > 1e-9 * std::max(1.0, horizon))
                    throw numeric_error("krylov_bogolyubov: quadrature node missing");
                const double trap = (q == 0 || q == t_quad) ? 0.5 : 1.0;
                members.push_back({tr.states[best], mem.weight * trap / t_quad});
            }
        }
    } else {
        IntegrateOptions snap = opt;
        snap.dt_out = 1.0;
        for (const auto& mem : seed.members) {
            const auto tr = integrate(mem.state, pot, force, mem.state.t,
                                      mem.state.t + static_cast<double>(n_steps), snap);
            for (int k = 1; k <= n_steps; ++k) {
                const double node_t = mem.state.t + k;
                std::size_t best = 0;
                double best_err = std::abs(tr.times.front() - node_t);
                for (std::size_t q = 1; q < tr.times.size(); ++q) {
                    const double err = std::abs(tr.times[q] - node_t);
                    if (err < best_err) {
                        best_err = err;
                        best = q;
                    }
                }
                if (best_err > 1e-9 * std::max(1.0, static_cast<double>(n_steps)))
                    throw numeric_error("krylov_bogolyubov: integer node missing");
                members.push_back({tr.states[best], mem.weight / n_steps});
            }
        }
    }
    return make_ensemble(std::move(members));
}

double invariance_defect(const Ensemble& e, const Potential& pot, const Forcing& force,
                         double tau, const IntegrateOptions& opt, std::uint64_t seed) {
    const double z0 = z_functional(e, e, seed).value;
    const auto moved = evolve_ensemble(e, pot, force, tau, opt);
    const double z1 = z_functional(moved, moved, seed).value;
    return std::abs(z1 - z0);
}

} // namespace fk
