#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "fk/chain.hpp"
#include "fk/measures.hpp"
#include "fk/sliding.hpp"

namespace fk {

struct Rational {
    long long num = 0;
    long long den = 1; // always positive; the fraction is fully reduced
};

// exact winding-per-period ratio of the state
Rational rotation_number(const ChainState& s);

// continued-fraction convergents of x with denominator at most q_max,
// in order of nondecreasing denominator
std::vector<Rational> convergents(double x, long long q_max = 128);

struct OrderednessReport {
    bool ordered = true;
    long long worst_p = 0, worst_q = 0; // translate with the largest violation
    double violation = 0.0; // overshoot of the smaller side at the worst pair
    double width = 0.0;     // max minus min of u_j - j*rho over one period
};

// compares the state against all translates with |p| <= max_p and the
// finitely many q that can interleave; ordered means every pair is
// comparable within tol
OrderednessReport ordered_check(const ChainState& s, int max_p, double tol = 1e-9);

// (u_0 mod 1, u_1 - u_0): the two coordinates that determine an ordered
// configuration
struct CylinderPoint {
    double x = 0.0;
    double p = 0.0;
};

CylinderPoint project_cylinder(const ChainState& s);

// circle metric in x plus the plain gap in p
double cylinder_distance(const CylinderPoint& a, const CylinderPoint& b);

struct InjectivityReport {
    int checked_pairs = 0; // pairs beyond the configuration-distance gate
    int violations = 0;    // far configurations with near-identical projections
    double min_projection_gap = 0.0; // over checked pairs; 0 when none checked
    int singular_pairs = 0; // pair differences carrying a non-simple zero
    int worst_a = -1, worst_b = -1; // indices achieving the minimal gap
};

// projection injectivity audit over a sample family: configurations farther
// apart than eps_config must keep their cylinder projections at least
// eps_proj apart, and no pair difference may have a singular zero
InjectivityReport injectivity_diagnostic(const std::vector<ChainState>& samples,
                                         double eps_config = 1e-4, double eps_proj = 1e-6);

struct CharacteristicRow {
    double x = 0.0, p = 0.0;         // sample
    double x_t = 0.0, p_t = 0.0;     // after the site translate
    double x_phi = 0.0, p_phi = 0.0; // after the time step
};

// cylinder projections of each sample, its translate by one site, and its
// image under the flow (dc_dt for constant forcing, the time-1 map otherwise)
std::vector<CharacteristicRow> characteristic_map_samples(
    const std::vector<ChainState>& samples, const Potential& pot, const Forcing& force,
    double dc_dt, const IntegrateOptions& opt = {});

void write_characteristic_csv(const std::vector<CharacteristicRow>& rows, std::ostream& out);

struct OrderedInvariant {
    Ensemble ensemble;
    OrderednessReport orderedness; // worst case over members
    Verdict verdict = Verdict::undetermined;
    double t0 = 0.0;     // sliding period when the orbit closed
    double defect = 0.0; // invariance defect of the output at unit time
};

// Builds an invariant ensemble of ordered configurations at rotation number
// num/den: relax from the linear profile, classify the long-run motion, then
// average over one sliding period (n_avg nodes), keep the rest point, or
// fall back to the generic time average.  Fails loudly if any member leaves
// the ordered class.
OrderedInvariant construct_ordered_invariant(long long num, long long den,
                                             const Potential& pot, const Forcing& force,
                                             int n_avg, double transient = 200.0,
                                             const SlideTolerances& tol = {},
                                             const IntegrateOptions& opt = {});

} // namespace fk
