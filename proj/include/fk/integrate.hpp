#pragma once

#include <vector>

#include "fk/chain.hpp"

namespace fk {

struct IntegrateOptions {
    double dt = 1e-3;     // fixed step (final partial step shortened)
    double dt_out = 1e-2; // output sampling interval
};

struct Trajectory {
    std::vector<double> times;
    std::vector<ChainState> states; // aligned with times
};

// classic fixed-step 4th-order run over [t0, t1]; samples at t0 + k*dt_out
// and at t1.  Forward time only.
Trajectory integrate(const ChainState& s0, const Potential& pot, const Forcing& force,
                     double t0, double t1, const IntegrateOptions& opt = {});

// time-1 map for 1-periodic forcing; the state's time stamp is reduced mod 1
ChainState stroboscopic_map(const ChainState& s, const Potential& pot, const Forcing& force,
                            const IntegrateOptions& opt = {});

// N-periodic cooperative linear system
//   dw_j/dt = a_j w_{j-1} + b_j w_{j+1} + c_j w_j,   a_j, b_j >= delta > 0
struct LinearCoeffs {
    std::vector<double> a, b, c;
    double delta = 0.0;
};

struct LinearTrajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> w;    // [sample][site]
    std::vector<std::vector<double>> dwdt; // system right-hand side at samples
};

// constant-coefficient integration; t1 < t0 runs the system backward
LinearTrajectory integrate_linear(const std::vector<double>& w0, const LinearCoeffs& coeffs,
                                  double t0, double t1, const IntegrateOptions& opt = {});

// w integrated along two carried base chains: difference-quotient coefficients
// are re-evaluated from the base stage states at every stage point, so with
// w0 = u2 - u1 the linear trajectory equals the co-integrated difference to
// round-off.  Empty w0 means u2 - u1.
struct PairLinearResult {
    Trajectory first, second;
    LinearTrajectory w;
};
PairLinearResult integrate_linear_pair(const ChainState& u1, const ChainState& u2,
                                       const std::vector<double>& w0,
                                       const Potential& pot, const Forcing& force,
                                       double t0, double t1, const IntegrateOptions& opt = {});

// trajectory plus q(t) = integral of the site-mean squared velocity,
// accumulated inside the stepper (same order as the state itself)
struct DissipationTrace {
    Trajectory traj;
    std::vector<double> q; // aligned with traj.times
};
DissipationTrace integrate_with_dissipation(const ChainState& s0, const Potential& pot,
                                            const Forcing& force, double t0, double t1,
                                            const IntegrateOptions& opt = {});

} // namespace fk
