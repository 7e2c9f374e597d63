#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "fk/chain.hpp"
#include "fk/integrate.hpp"

namespace fk {

// Zero-set calculus for N-periodic profiles w.  A profile is read through
// half-open cells [j, j+1): cell j holds a zero iff w_j = 0 or w_j w_{j+1} < 0.
// A vanishing w_{j+1} alone belongs to cell j+1, never to cell j.

struct ZeroTolerances {
    double zero_rel = 1e-10;     // |w| below zero_rel * scale reads as zero
    double event_time = 1e-9;    // roots closer than this form one event
    double tangency_rel = 1e-8;  // near-miss threshold, relative to scale
};

// snapped sign: -1, 0, +1 with |x| <= tol_abs collapsing to 0
int snapped_sign(double x, double tol_abs);

// cell indicator vector z, z[j] in {0,1}, periodic indexing
std::vector<int> zero_profile(const std::vector<double>& w, double tol_abs);

// number of zero cells in one period
int count_zeros(const std::vector<double>& w, double tol_abs);

// zero cells in [m, n) on the extended (periodic) cell lattice, m < n
int count_zeros_window(const std::vector<double>& w, std::int64_t m, std::int64_t n,
                       double tol_abs);

enum class SingularType { none, type_one, type_two };

struct ZeroSiteClass {
    bool zero_site = false;
    bool singular = false;
    SingularType type = SingularType::none;
    int run_start = 0; // s0 of the maximal zero run containing the site
    int degree = 0;    // run length k
    int sigma_left = 0, sigma_right = 0; // flank signs
};

// classifies the site's zero: nonsingular simple crossing (opposite flanks,
// degree 1), or singular of type I (opposite flanks, degree >= 2) / type II
// (equal flanks, any degree)
ZeroSiteClass classify_zero(const std::vector<double>& w, int site, double tol_abs);

// frozen linearization of the chain field at a state:
//   a_j = -V12(u_{j-1}, u_j),  b_j = -V12(u_j, u_{j+1}),
//   c_j = -(V22(u_{j-1}, u_j) + V11(u_j, u_{j+1}))
LinearCoeffs linearized_coeffs(const ChainState& s, const Potential& pot);

struct LeadingTerm {
    int order = 0;      // first Taylor order that can be nonzero at the site
    double coeff = 0.0; // that Taylor coefficient of the frozen system
};

// Taylor coefficients d_l[j] of the frozen linear system about the profile w,
//   d_0 = w (snapped),  l d_l[j] = a_j d_{l-1}[j-1] + b_j d_{l-1}[j+1] + c_j d_{l-1}[j],
// reported for the run sites s0..s0+k-1 at their leading orders
// j* = min(i+1, k-i).  Interior ties (odd k middle site) can cancel; the
// coefficient is reported as computed.
std::vector<LeadingTerm> predict_leading_coeffs(const std::vector<double>& w,
                                                const LinearCoeffs& coeffs, int run_start,
                                                int degree, double tol_abs);

enum class EventKind { crossing, disappearance };

struct ZeroEvent {
    double t = 0.0;
    int site = 0;   // run start s0, normalized to [0, n)
    EventKind kind = EventKind::crossing;
    SingularType type = SingularType::none;
    int degree = 0;    // run length k
    int direction = 0; // crossing direction (+1 rightward), 0 for disappearances
    int count = 0;     // run-cell death total: 0 crossing, k-1 type I, k type II
    int before_window = 0, at_window = 0, after_window = 0; // zero cells over
                                                            // cells s0-1..s0+k-1
    int window_deaths = 0; // ledger deaths attributed to this event
};

struct NearTangency {
    double t = 0.0;
    int site = 0;
    double min_abs = 0.0; // closest approach to zero, no sign change
};

// Conservation ledger for one tracked trajectory.  crossings[j] counts signed
// zero passages through site j (rightward positive); deaths[j] counts zeros
// destroyed in cell j.  For every window the identity
//   z_end(m,n) - z_start(m,n) = crossings[m] - crossings[n] - sum_{j in [m,n)} deaths[j]
// holds with exact integers.
struct ZeroLedger {
    int n = 0;
    double t0 = 0.0, t1 = 0.0;
    std::vector<int> z_start, z_end;
    std::vector<long long> crossings; // per site
    std::vector<long long> deaths;    // per cell
    std::vector<ZeroEvent> events;
    std::vector<NearTangency> tangencies;
};

// Replays a sampled linear trajectory through cubic Hermite interpolation,
// locates every sign change, groups simultaneous ones into events, classifies
// them, and accumulates the ledger.  The initial and final profiles must stay
// clear of zero at every site (zero cells from sign changes are fine).
ZeroLedger track_zero_events(const LinearTrajectory& tr, const ZeroTolerances& tol = {});

// residual of the conservation identity on cells [m, n), 0 <= m < n <= 2n
long long window_residual(const ZeroLedger& led, int m, int n);

struct AuditReport {
    bool balanced = false;
    long long max_abs_residual = 0;
    int worst_m = 0, worst_n = 0;
    long long full_window_residual = 0;
};

// checks every window 0 <= m < n <= N
AuditReport zero_balance_audit(const ZeroLedger& led);

// one row per event: t,site,kind,degree,type,delta_z
void write_zero_ledger_csv(const ZeroLedger& led, std::ostream& out);

} // namespace fk
