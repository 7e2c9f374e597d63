#pragma once

#include <cstdint>
#include <vector>

#include "fk/forcing.hpp"
#include "fk/potential.hpp"

namespace fk {

// One period of a spatially periodic-with-winding chain configuration:
// the infinite lattice is recovered through u_{i+kN} = u_i + kM, so the
// rotation number is exactly M/N.
struct ChainState {
    int n = 1;              // sites per period (N >= 1)
    int m = 0;              // winding per period (M)
    double t = 0.0;         // time stamp
    std::vector<double> u;  // size n

    // extended-lattice value u_i for any integer i
    double site(std::int64_t i) const;
};

// validates n >= 1, u.size() == n, finite entries
void validate_state(const ChainState& s);

// du_j/dt = -V2(u_{j-1}, u_j) - V1(u_j, u_{j+1}) + F  for one period
std::vector<double> vector_field(const ChainState& s, const Potential& pot, double f_value);

// (1/N) sum_j V(u_j, u_{j+1})
double energy_per_site(const ChainState& s, const Potential& pot);

// max_j |u_{j+1} - u_j| over one period (wrap uses the winding)
double spacing_bound(const ChainState& s);

// (T_{p,q} u)_i = u_{i+p} + q on the extended lattice
ChainState translate(const ChainState& s, std::int64_t p, std::int64_t q);

enum class Order { less_equal, greater_equal, equal, incomparable };

// componentwise comparison on the extended lattice over one lcm window;
// differing effective windings are incomparable (the tails diverge)
Order partial_order_compare(const ChainState& a, const ChainState& b, double tol = 0.0);

// translation-quotient distance:
//   min over integer r of max_{|j| <= window} e^{-|j|/n0} |a_j - b_j - r|
double config_distance(const ChainState& a, const ChainState& b,
                       int window = 32, double n0 = 8.0);

} // namespace fk
