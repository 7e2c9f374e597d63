#pragma once

#include <vector>

namespace fk {

// Driving force F(t).  DC: constant.  AC: 1-periodic trigonometric polynomial
//   F(t) = mean + sum_n [ c_n cos(2 pi n t) + s_n sin(2 pi n t) ],  n >= 1.
struct Forcing {
    enum class Kind { dc, ac };

    struct Harmonic {
        int n = 1;
        double c = 0.0; // cosine coefficient
        double s = 0.0; // sine coefficient
    };

    Kind kind = Kind::dc;
    double mean = 0.0;
    std::vector<Harmonic> harmonics; // ignored for dc

    double operator()(double t) const;

    // sqrt of the variance of F over one period, from coefficients
    double dispersion() const;
};

Forcing dc_forcing(double value);
Forcing ac_forcing(double mean, std::vector<Forcing::Harmonic> harmonics);

} // namespace fk
