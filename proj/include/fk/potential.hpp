#pragma once

#include <functional>

namespace fk {

// Nearest-neighbour interaction potential V(u, v) with analytic partials.
// Contract:
//   * V(u+1, v+1) = V(u, v)
//   * V12 <= -twist_delta < 0 everywhere (twist condition)
// The closed-form family
//   V(u, v) = (v-u)^2/2 + (K/4pi^2)(1 - cos 2 pi u)
// carries a `standard` tag so hot paths can use the explicit expressions;
// custom potentials supply all six callables.
struct Potential {
    enum class Family { standard, custom };

    Family family = Family::custom;
    double K = 0.0; // standard family pinning strength

    std::function<double(double, double)> V;
    std::function<double(double, double)> V1;  // dV/du
    std::function<double(double, double)> V2;  // dV/dv
    std::function<double(double, double)> V11;
    std::function<double(double, double)> V12;
    std::function<double(double, double)> V22;

    double twist_delta = 1.0; // lower bound for -V12
};

// standard family with stiffness K >= 0 (K = 0: harmonic chain)
Potential standard_potential(double K);

// the same expressions wrapped as a custom potential (cross-validation aid)
Potential standard_potential_as_custom(double K);

struct TwistReport {
    bool ok = false;
    double min_neg_v12 = 0.0;          // min over the grid of -V12
    double periodicity_residual = 0.0; // max |V(u+1,v+1) - V(u,v)|
    double worst_u = 0.0, worst_v = 0.0; // grid point achieving min_neg_v12
};

// samples [0,1)^2 on a resolution x resolution grid; ok iff the twist floor
// holds and the periodicity residual is below 1e-9
TwistReport twist_audit(const Potential& pot, int resolution = 64);

} // namespace fk
