#include "fk/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fk/errors.hpp"

namespace fk {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr double blowup_amplitude = 1e8;
constexpr double quotient_tol = 1e-6; // coordinate gap below which partials replace quotients

// right-hand side of the chain equation on one period, neighbours wrapped
// through the winding
struct ChainRhs {
    const Potential& pot;
    const Forcing& force;
    int n;
    double m;

    void operator()(double t, const std::vector<double>& u, std::vector<double>& du) const {
        const double f = force(t);
        if (pot.family == Potential::Family::standard) {
            const double k2pi = pot.K / two_pi;
            for (int j = 0; j < n; ++j) {
                const double um = (j > 0) ? u[j - 1] : u[n - 1] - m;
                const double up = (j + 1 < n) ? u[j + 1] : u[0] + m;
                du[j] = up - 2.0 * u[j] + um - k2pi * std::sin(two_pi * u[j]) + f;
            }
        } else {
            for (int j = 0; j < n; ++j) {
                const double um = (j > 0) ? u[j - 1] : u[n - 1] - m;
                const double up = (j + 1 < n) ? u[j + 1] : u[0] + m;
                du[j] = -pot.V2(um, u[j]) - pot.V1(u[j], up) + f;
            }
        }
    }
};

template <class Rhs>
struct Rk4Workspace {
    std::vector<double> k1, k2, k3, k4, tmp;

    explicit Rk4Workspace(std::size_t dim)
        : k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim) {}

    void step(const Rhs& f, double t, double h, std::vector<double>& y) {
        const std::size_t dim = y.size();
        f(t, y, k1);
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
        f(t + 0.5 * h, tmp, k2);
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
        f(t + 0.5 * h, tmp, k3);
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + h * k3[i];
        f(t + h, tmp, k4);
        for (std::size_t i = 0; i < dim; ++i)
            y[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
};

void check_options(const IntegrateOptions& opt) {
    if (!(opt.dt > 0.0) || !(opt.dt_out > 0.0))
        throw config_error("integrate: dt and dt_out must be positive");
}

void check_finite(const std::vector<double>& y) {
    for (double x : y) {
        if (!std::isfinite(x) || std::abs(x) > blowup_amplitude)
            throw numeric_error("integrate: state blow-up");
    }
}

// output instants t0 + k*dt_out strictly inside (t0, t1), then t1 itself;
// works for either time direction
std::vector<double> output_targets(double t0, double t1, double dt_out) {
    std::vector<double> targets;
    const double span = t1 - t0;
    const double dir = (span >= 0.0) ? 1.0 : -1.0;
    const double eps = 1e-12 * std::max(1.0, std::abs(t1));
    for (std::int64_t k = 1;; ++k) {
        const double tk = t0 + dir * dt_out * static_cast<double>(k);
        if (dir * (t1 - tk) <= eps) break;
        targets.push_back(tk);
    }
    targets.push_back(t1);
    return targets;
}

// march y from cur to target with fixed steps of size dt (shortened at the end)
template <class Rhs>
void march(const Rhs& f, Rk4Workspace<Rhs>& ws, std::vector<double>& y,
           double& cur, double target, double dt) {
    const double dir = (target >= cur) ? 1.0 : -1.0;
    while (dir * (target - cur) > 1e-14 * std::max(1.0, std::abs(target))) {
        const double h = dir * std::min(dt, dir * (target - cur));
        ws.step(f, cur, h, y);
        cur += h;
    }
    cur = target;
}

} // namespace

Trajectory integrate(const ChainState& s0, const Potential& pot, const Forcing& force,
                     double t0, double t1, const IntegrateOptions& opt) {
    validate_state(s0);
    check_options(opt);
    if (t1 < t0) throw config_error("integrate: backward time is not supported");

    ChainRhs rhs{pot, force, s0.n, static_cast<double>(s0.m)};
    Rk4Workspace<ChainRhs> ws(s0.u.size());

    Trajectory out;
    ChainState s = s0;
    s.t = t0;
    out.times.push_back(t0);
    out.states.push_back(s);
    if (t1 == t0) return out;

    std::vector<double> y = s0.u;
    double cur = t0;
    for (double target : output_targets(t0, t1, opt.dt_out)) {
        march(rhs, ws, y, cur, target, opt.dt);
        check_finite(y);
        s.u = y;
        s.t = cur;
        out.times.push_back(cur);
        out.states.push_back(s);
    }
    return out;
}

ChainState stroboscopic_map(const ChainState& s, const Potential& pot, const Forcing& force,
                            const IntegrateOptions& opt) {
    ChainState start = s;
    start.t = s.t - std::floor(s.t); // reduce mod 1; forcing has period 1
    IntegrateOptions o = opt;
    o.dt_out = 1.0;
    Trajectory tr = integrate(start, pot, force, start.t, start.t + 1.0, o);
    return tr.states.back();
}

namespace {

struct LinearRhs {
    const LinearCoeffs& c;
    int n;

    void operator()(double, const std::vector<double>& w, std::vector<double>& dw) const {
        for (int j = 0; j < n; ++j) {
            const double wm = (j > 0) ? w[j - 1] : w[n - 1];
            const double wp = (j + 1 < n) ? w[j + 1] : w[0];
            dw[j] = c.a[j] * wm + c.b[j] * wp + c.c[j] * w[j];
        }
    }
};

void check_linear_coeffs(const LinearCoeffs& c) {
    const std::size_t n = c.a.size();
    if (n == 0 || c.b.size() != n || c.c.size() != n)
        throw config_error("linear system: coefficient arrays must be same nonzero size");
    const double floor_value = std::max(c.delta, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        if (!(c.a[j] > 0.0) || !(c.b[j] > 0.0))
            throw config_error("linear system: twist violated (a_j, b_j must be > 0)");
        if (floor_value > 0.0 && (c.a[j] < floor_value - 1e-12 || c.b[j] < floor_value - 1e-12))
            throw config_error("linear system: coefficient below declared twist floor");
    }
}

} // namespace

LinearTrajectory integrate_linear(const std::vector<double>& w0, const LinearCoeffs& coeffs,
                                  double t0, double t1, const IntegrateOptions& opt) {
    check_linear_coeffs(coeffs);
    check_options(opt);
    if (w0.size() != coeffs.a.size())
        throw config_error("linear system: w0 size does not match coefficients");

    const int n = static_cast<int>(w0.size());
    LinearRhs rhs{coeffs, n};
    Rk4Workspace<LinearRhs> ws(w0.size());

    LinearTrajectory out;
    std::vector<double> y = w0;
    std::vector<double> dy(w0.size());

    auto emit = [&](double t) {
        rhs(t, y, dy);
        out.times.push_back(t);
        out.w.push_back(y);
        out.dwdt.push_back(dy);
    };

    emit(t0);
    if (t1 == t0) return out;
    double cur = t0;
    for (double target : output_targets(t0, t1, opt.dt_out)) {
        march(rhs, ws, y, cur, target, opt.dt);
        check_finite(y);
        emit(cur);
    }
    return out;
}

namespace {

// base pair + carried linear profile; coefficients are difference quotients
// re-evaluated at every stage state, with partial-derivative fallbacks when a
// coordinate gap closes
struct PairRhs {
    const Potential& pot;
    const Forcing& force;
    int n;
    double m;
    double delta;

    void operator()(double t, const std::vector<double>& y, std::vector<double>& dy) const {
        const double f = force(t);
        const double* u1 = y.data();
        const double* u2 = y.data() + n;
        const double* w = y.data() + 2 * n;
        double* d1 = dy.data();
        double* d2 = dy.data() + n;
        double* dw = dy.data() + 2 * n;

        auto at = [this](const double* u, int j) {
            if (j < 0) return u[j + n] - m;
            if (j >= n) return u[j - n] + m;
            return u[j];
        };

        for (int j = 0; j < n; ++j) {
            const double a1m = at(u1, j - 1), a1p = at(u1, j + 1);
            const double a2m = at(u2, j - 1), a2p = at(u2, j + 1);
            d1[j] = -pot.V2(a1m, u1[j]) - pot.V1(u1[j], a1p) + f;
            d2[j] = -pot.V2(a2m, u2[j]) - pot.V1(u2[j], a2p) + f;

            const double den_a = a1m - a2m;
            const double aj = (std::abs(den_a) > quotient_tol)
                                  ? (pot.V2(a2m, u1[j]) - pot.V2(a1m, u1[j])) / den_a
                                  : -pot.V12(a1m, u1[j]);
            const double den_b = a1p - a2p;
            const double bj = (std::abs(den_b) > quotient_tol)
                                  ? (pot.V1(u1[j], a2p) - pot.V1(u1[j], a1p)) / den_b
                                  : -pot.V12(u1[j], a1p);
            const double den_c = u1[j] - u2[j];
            const double cj =
                (std::abs(den_c) > quotient_tol)
                    ? (pot.V2(a2m, u2[j]) - pot.V2(a2m, u1[j]) + pot.V1(u2[j], a2p) -
                       pot.V1(u1[j], a2p)) /
                          den_c
                    : -(pot.V22(a1m, u1[j]) + pot.V11(u1[j], a1p));
            if (aj < delta - 1e-9 || bj < delta - 1e-9)
                throw numeric_error("pair linearization: twist floor violated");

            const double wm = (j > 0) ? w[j - 1] : w[n - 1];
            const double wp = (j + 1 < n) ? w[j + 1] : w[0];
            dw[j] = aj * wm + bj * wp + cj * w[j];
        }
    }
};

} // namespace

PairLinearResult integrate_linear_pair(const ChainState& u1, const ChainState& u2,
                                       const std::vector<double>& w0,
                                       const Potential& pot, const Forcing& force,
                                       double t0, double t1, const IntegrateOptions& opt) {
    validate_state(u1);
    validate_state(u2);
    check_options(opt);
    if (u1.n != u2.n || u1.m != u2.m)
        throw config_error("pair linearization: base chains must share (N, M)");
    if (t1 < t0) throw config_error("integrate: backward time is not supported");
    const int n = u1.n;
    std::vector<double> w_init = w0.empty() ? [&] {
        std::vector<double> d(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) d[j] = u2.u[j] - u1.u[j];
        return d;
    }()
                                            : w0;
    if (w_init.size() != static_cast<std::size_t>(n))
        throw config_error("pair linearization: w0 size does not match chains");

    PairRhs rhs{pot, force, n, static_cast<double>(u1.m), pot.twist_delta};
    Rk4Workspace<PairRhs> ws(static_cast<std::size_t>(3 * n));

    std::vector<double> y(static_cast<std::size_t>(3 * n));
    std::copy(u1.u.begin(), u1.u.end(), y.begin());
    std::copy(u2.u.begin(), u2.u.end(), y.begin() + n);
    std::copy(w_init.begin(), w_init.end(), y.begin() + 2 * n);
    std::vector<double> dy(y.size());

    PairLinearResult out;
    auto emit = [&](double t) {
        rhs(t, y, dy);
        ChainState s1 = u1, s2 = u2;
        s1.t = s2.t = t;
        s1.u.assign(y.begin(), y.begin() + n);
        s2.u.assign(y.begin() + n, y.begin() + 2 * n);
        out.first.times.push_back(t);
        out.first.states.push_back(std::move(s1));
        out.second.times.push_back(t);
        out.second.states.push_back(std::move(s2));
        out.w.times.push_back(t);
        out.w.w.emplace_back(y.begin() + 2 * n, y.end());
        out.w.dwdt.emplace_back(dy.begin() + 2 * n, dy.end());
    };

    emit(t0);
    if (t1 == t0) return out;
    double cur = t0;
    for (double target : output_targets(t0, t1, opt.dt_out)) {
        march(rhs, ws, y, cur, target, opt.dt);
        check_finite(y);
        emit(cur);
    }
    return out;
}

namespace {

// chain state augmented with the running integral of the site-mean squared velocity
struct DissipationRhs {
    ChainRhs chain;

    void operator()(double t, const std::vector<double>& y, std::vector<double>& dy) const {
        const int n = chain.n;
        std::vector<double> u(y.begin(), y.begin() + n);
        std::vector<double> du(static_cast<std::size_t>(n));
        chain(t, u, du);
        double s = 0.0;
        for (int j = 0; j < n; ++j) {
            dy[j] = du[j];
            s += du[j] * du[j];
        }
        dy[n] = s / n;
    }
};

} // namespace

DissipationTrace integrate_with_dissipation(const ChainState& s0, const Potential& pot,
                                            const Forcing& force, double t0, double t1,
                                            const IntegrateOptions& opt) {
    validate_state(s0);
    check_options(opt);
    if (t1 < t0) throw config_error("integrate: backward time is not supported");

    const int n = s0.n;
    DissipationRhs rhs{ChainRhs{pot, force, n, static_cast<double>(s0.m)}};
    Rk4Workspace<DissipationRhs> ws(static_cast<std::size_t>(n + 1));

    std::vector<double> y(static_cast<std::size_t>(n + 1), 0.0);
    std::copy(s0.u.begin(), s0.u.end(), y.begin());

    DissipationTrace out;
    ChainState s = s0;
    auto emit = [&](double t) {
        s.u.assign(y.begin(), y.begin() + n);
        s.t = t;
        out.traj.times.push_back(t);
        out.traj.states.push_back(s);
        out.q.push_back(y[n]);
    };

    emit(t0);
    if (t1 == t0) return out;
    double cur = t0;
    for (double target : output_targets(t0, t1, opt.dt_out)) {
        march(rhs, ws, y, cur, target, opt.dt);
        check_finite(y);
        emit(cur);
    }
    return out;
}

} // namespace fk
