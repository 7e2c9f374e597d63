#pragma once

#include <cstdint>
#include <vector>

#include "fk/chain.hpp"
#include "fk/integrate.hpp"

namespace fk {

// Weighted finite family of chain states, read modulo integer shifts.
// Members are canonicalized with u_0 in [0, 1) on ingest (that pins the
// shift-orbit representative); weights are positive and sum to one.
struct Ensemble {
    struct Member {
        ChainState state;
        double weight = 1.0;
    };
    std::vector<Member> members;
};

// validates members, canonicalizes u_0, normalizes the weights
Ensemble make_ensemble(std::vector<Ensemble::Member> members);
Ensemble uniform_ensemble(std::vector<ChainState> states);

// Intersections between u and the integer-shift orbit of v in cell
// [cell, cell+1): sum over integer r of the zero indicator of u - v + r on
// that cell.  The r reproducing u = v identically there is skipped, so the
// self count is zero.  Bounded by 2n+1 when both spacings are below n
// (checked on every call).
int pair_intersections(const ChainState& u, const ChainState& v, std::int64_t cell);

struct ZValue {
    double value = 0.0;
    double stat_err = 0.0; // zero on the exact path
};

// Z(mu1, mu2): member-pair average of the per-cell intersection count, the
// spatial mean running over one common period of the pair.  Ensembles with
// more than 64 members on either side switch to a seeded 4096-pair
// subsample and report a standard error.
ZValue z_functional(const Ensemble& a, const Ensemble& b, std::uint64_t seed = 0);

// per-cell zero fraction of the velocity profile, averaged over members;
// constant forcing only, and identically zero velocity contributes zero
double z_derivative_functional(const Ensemble& e, const Potential& pot, const Forcing& force);

// member-wise flow over the given horizon; weights unchanged
Ensemble evolve_ensemble(const Ensemble& e, const Potential& pot, const Forcing& force,
                         double horizon, const IntegrateOptions& opt = {});

// Time-averaged push-forward along the flow.  Constant forcing: trapezoid
// average of the flow over [0, n_steps] on t_quad equal intervals.  Periodic
// forcing: equal-weight average of the time-1 map iterates 1..n_steps.
Ensemble krylov_bogolyubov(const Ensemble& seed, const Potential& pot, const Forcing& force,
                           int n_steps, int t_quad, const IntegrateOptions& opt = {});

// |Z(e evolved by tau) - Z(e)| of the self pairing; near zero on invariant
// ensembles
double invariance_defect(const Ensemble& e, const Potential& pot, const Forcing& force,
                         double tau, const IntegrateOptions& opt = {}, std::uint64_t seed = 0);

} // namespace fk
