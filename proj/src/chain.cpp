#include "fk/chain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "fk/errors.hpp"

namespace fk {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;

// floor division for possibly negative numerators
inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}
} // namespace

double ChainState::site(std::int64_t i) const {
    const std::int64_t k = floor_div(i, n);
    const std::int64_t r = i - k * n;
    return u[static_cast<std::size_t>(r)] + static_cast<double>(m) * static_cast<double>(k);
}

void validate_state(const ChainState& s) {
    if (s.n < 1) throw config_error("chain state: n must be >= 1");
    if (s.u.size() != static_cast<std::size_t>(s.n))
        throw config_error("chain state: u size does not match n");
    for (double x : s.u)
        if (!std::isfinite(x)) throw numeric_error("chain state: non-finite site value");
    if (!std::isfinite(s.t)) throw numeric_error("chain state: non-finite time stamp");
}

std::vector<double> vector_field(const ChainState& s, const Potential& pot, double f_value) {
    const int n = s.n;
    std::vector<double> f(static_cast<std::size_t>(n));
    if (pot.family == Potential::Family::standard) {
        const double k2pi = pot.K / two_pi;
        for (int j = 0; j < n; ++j) {
            const double um = s.site(j - 1);
            const double u0 = s.u[static_cast<std::size_t>(j)];
            const double up = s.site(j + 1);
            f[static_cast<std::size_t>(j)] =
                up - 2.0 * u0 + um - k2pi * std::sin(two_pi * u0) + f_value;
        }
    } else {
        for (int j = 0; j < n; ++j) {
            const double um = s.site(j - 1);
            const double u0 = s.u[static_cast<std::size_t>(j)];
            const double up = s.site(j + 1);
            f[static_cast<std::size_t>(j)] = -pot.V2(um, u0) - pot.V1(u0, up) + f_value;
        }
    }
    return f;
}

double energy_per_site(const ChainState& s, const Potential& pot) {
    double e = 0.0;
    for (int j = 0; j < s.n; ++j)
        e += pot.V(s.u[static_cast<std::size_t>(j)], s.site(j + 1));
    return e / s.n;
}

double spacing_bound(const ChainState& s) {
    double b = 0.0;
    for (int j = 0; j < s.n; ++j)
        b = std::max(b, std::abs(s.site(j + 1) - s.u[static_cast<std::size_t>(j)]));
    return b;
}

ChainState translate(const ChainState& s, std::int64_t p, std::int64_t q) {
    ChainState out;
    out.n = s.n;
    out.m = s.m;
    out.t = s.t;
    out.u.resize(static_cast<std::size_t>(s.n));
    for (int i = 0; i < s.n; ++i)
        out.u[static_cast<std::size_t>(i)] = s.site(i + p) + static_cast<double>(q);
    return out;
}

Order partial_order_compare(const ChainState& a, const ChainState& b, double tol) {
    const std::int64_t l = std::lcm<std::int64_t>(a.n, b.n);
    // effective winding over the common window
    const std::int64_t wa = static_cast<std::int64_t>(a.m) * (l / a.n);
    const std::int64_t wb = static_cast<std::int64_t>(b.m) * (l / b.n);
    if (wa != wb) return Order::incomparable;

    bool all_le = true, all_ge = true, all_eq = true;
    for (std::int64_t i = 0; i < l; ++i) {
        const double d = a.site(i) - b.site(i);
        if (d > tol) all_le = false;
        if (d < -tol) all_ge = false;
        if (std::abs(d) > tol) all_eq = false;
    }
    if (all_eq) return Order::equal;
    if (all_le) return Order::less_equal;
    if (all_ge) return Order::greater_equal;
    return Order::incomparable;
}

double config_distance(const ChainState& a, const ChainState& b, int window, double n0) {
    if (window < 0 || n0 <= 0.0) throw config_error("config distance: bad window/n0");
    const int w = window;
    std::vector<double> diff(static_cast<std::size_t>(2 * w + 1));
    double dmin = std::numeric_limits<double>::infinity();
    double dmax = -dmin;
    for (int j = -w; j <= w; ++j) {
        const double d = a.site(j) - b.site(j);
        diff[static_cast<std::size_t>(j + w)] = d;
        dmin = std::min(dmin, d);
        dmax = std::max(dmax, d);
    }
    const std::int64_t r_lo = static_cast<std::int64_t>(std::floor(dmin)) - 1;
    const std::int64_t r_hi = static_cast<std::int64_t>(std::ceil(dmax)) + 1;
    double best = std::numeric_limits<double>::infinity();
    for (std::int64_t r = r_lo; r <= r_hi; ++r) {
        double worst = 0.0;
        for (int j = -w; j <= w; ++j) {
            const double val = std::exp(-std::abs(j) / n0) *
                               std::abs(diff[static_cast<std::size_t>(j + w)] - static_cast<double>(r));
            worst = std::max(worst, val);
        }
        best = std::min(best, worst);
    }
    return best;
}

} // namespace fk
