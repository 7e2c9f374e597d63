#include "fk/forcing.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "fk/errors.hpp"

namespace fk {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;
}

double Forcing::operator()(double t) const {
    if (kind == Kind::dc) return mean;
    double f = mean;
    for (const auto& h : harmonics) {
        const double w = two_pi * h.n * t;
        f += h.c * std::cos(w) + h.s * std::sin(w);
    }
    return f;
}

double Forcing::dispersion() const {
    if (kind == Kind::dc) return 0.0;
    double var = 0.0;
    for (const auto& h : harmonics) var += 0.5 * (h.c * h.c + h.s * h.s);
    return std::sqrt(var);
}

Forcing dc_forcing(double value) {
    Forcing f;
    f.kind = Forcing::Kind::dc;
    f.mean = value;
    return f;
}

Forcing ac_forcing(double mean, std::vector<Forcing::Harmonic> harmonics) {
    for (const auto& h : harmonics)
        if (h.n < 1) throw config_error("ac forcing: harmonic index must be >= 1");
    Forcing f;
    f.kind = Forcing::Kind::ac;
    f.mean = mean;
    f.harmonics = std::move(harmonics);
    return f;
}

} // namespace fk
