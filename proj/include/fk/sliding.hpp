#pragma once

#include <iosfwd>
#include <vector>

#include "fk/chain.hpp"
#include "fk/integrate.hpp"
#include "fk/measures.hpp"

namespace fk {

struct SlideTolerances {
    double tol_eq = 1e-8;  // sustained sup speed below this reads as rest
    double tol_v = 1e-8;   // per-site drift-rate spread bound
    double tol_per = 1e-6; // periodicity defect target
    double tol_m = 1e-4;   // modulation consistency target
};

struct SpeedEstimate {
    double v = 0.0;           // least-squares drift rate of site 0
    double site_spread = 0.0; // max minus min of the per-site rates
};

// least-squares slope of every site's world line over the given samples;
// sliding chains make the spread collapse
SpeedEstimate average_speed(const Trajectory& tr);

enum class Verdict { equilibrium, periodic_sliding, undetermined };

struct AsymptoticsReport {
    Verdict verdict = Verdict::undetermined;
    double v = 0.0;            // least-squares drift rate over the tail
    double t0 = 0.0;           // sliding period when periodic_sliding
    double residual_eq = 0.0;  // sup speed over the closing window
    double residual_per = 0.0; // best periodicity defect found
    double site_spread = 0.0;
    ChainState final_state;
    Trajectory tail; // second-half samples, kept for downstream fits
};

// integrate over [t, t+horizon] (constant forcing only), discard the first
// half, then test rest and unit-cell periodicity; anything unresolved is
// reported undetermined with the residuals it reached
AsymptoticsReport classify_asymptotics(const ChainState& s, const Potential& pot,
                                       const Forcing& force, double horizon,
                                       const SlideTolerances& tol = {},
                                       const IntegrateOptions& opt = {});

// hull of a sliding state: u_j(t) = theta + m(theta mod 1) with
// theta = j*rho + v*t + alpha and m of zero mean, tabulated on equal bins
struct ModulationTable {
    double rho = 0.0, v = 0.0, alpha = 0.0;
    std::vector<double> x;      // bin centers
    std::vector<double> m;      // hull value per bin (empty bins interpolated)
    std::vector<int> count;     // samples per bin
    std::vector<double> spread; // rms about the local linear fit per bin
    double residual = 0.0;      // max spread over occupied bins
};

// fails with an audit error when the residual exceeds tol_m: the samples do
// not come from a sliding state with the claimed (rho, v)
ModulationTable extract_modulation(const Trajectory& tr, double rho, double v,
                                   int bins = 256, double tol_m = 1e-4);

// sup over samples and sites of |u_j(t) - theta - m(theta mod 1)| with m
// read from the table by periodic linear interpolation
double modulation_reconstruction_error(const Trajectory& tr, const ModulationTable& tab);

// relative gap between F*v and the long-run mean square velocity; periodic
// verdicts average over an integer number of periods
double dissipation_residual(const DissipationTrace& trace, const Potential& pot,
                            const Forcing& force, const AsymptoticsReport& rep);

struct DepinPoint {
    double f = 0.0;
    Verdict verdict = Verdict::undetermined;
    double v = 0.0;
    double t0 = 0.0;
    double residual_dissipation = 0.0;
};

struct DepinSweep {
    std::vector<DepinPoint> points;
    double f_c = 0.0; // midpoint of the rest-to-sliding bracket
    bool f_c_found = false;
    bool monotone_ok = true; // v nondecreasing along the grid
};

// ascending drive sweep at fixed rotation number m/n, each point warm-started
// from the previous final state
DepinSweep depinning_sweep(const Potential& pot, int n, int m,
                           const std::vector<double>& f_grid, double horizon,
                           const SlideTolerances& tol = {}, const IntegrateOptions& opt = {});

void write_depin_csv(const DepinSweep& sweep, std::ostream& out);

// weighted fraction of (member, sample time in [0, s_max]) pairs whose
// evolved state lies within eps of the reference set in config_distance
double attractor_residence(const Ensemble& mu, const std::vector<ChainState>& a_hat,
                           const Potential& pot, const Forcing& force, double s_max,
                           double eps, int n_time_samples, const IntegrateOptions& opt = {});

// all site relabels of each state (the vertical quotient is already built
// into config_distance); handy for assembling reference sets
std::vector<ChainState> close_under_translation(const std::vector<ChainState>& states);

} // namespace fk
