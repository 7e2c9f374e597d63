#include "fk/potential.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "fk/errors.hpp"

namespace fk {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr double four_pi_sq = 4.0 * std::numbers::pi * std::numbers::pi;

void fill_standard_callables(Potential& p, double k) {
    p.V = [k](double u, double v) {
        const double d = v - u;
        return 0.5 * d * d + (k / four_pi_sq) * (1.0 - std::cos(two_pi * u));
    };
    p.V1 = [k](double u, double v) {
        return (u - v) + (k / two_pi) * std::sin(two_pi * u);
    };
    p.V2 = [](double u, double v) { return v - u; };
    p.V11 = [k](double u, double) { return 1.0 + k * std::cos(two_pi * u); };
    p.V12 = [](double, double) { return -1.0; };
    p.V22 = [](double, double) { return 1.0; };
}

} // namespace

Potential standard_potential(double K) {
    if (K < 0.0) throw config_error("standard potential: K must be >= 0");
    Potential p;
    p.family = Potential::Family::standard;
    p.K = K;
    p.twist_delta = 1.0;
    fill_standard_callables(p, K);
    return p;
}

Potential standard_potential_as_custom(double K) {
    Potential p = standard_potential(K);
    p.family = Potential::Family::custom;
    return p;
}

TwistReport twist_audit(const Potential& pot, int resolution) {
    if (resolution < 2) throw config_error("twist audit: resolution must be >= 2");
    TwistReport rep;
    rep.min_neg_v12 = std::numeric_limits<double>::infinity();
    for (int i = 0; i < resolution; ++i) {
        for (int j = 0; j < resolution; ++j) {
            const double u = static_cast<double>(i) / resolution;
            const double v = static_cast<double>(j) / resolution;
            const double neg12 = -pot.V12(u, v);
            if (neg12 < rep.min_neg_v12) {
                rep.min_neg_v12 = neg12;
                rep.worst_u = u;
                rep.worst_v = v;
            }
            const double res = std::abs(pot.V(u + 1.0, v + 1.0) - pot.V(u, v));
            if (res > rep.periodicity_residual) rep.periodicity_residual = res;
        }
    }
    rep.ok = rep.min_neg_v12 >= pot.twist_delta - 1e-12 && rep.periodicity_residual <= 1e-9;
    return rep;
}

} // namespace fk
