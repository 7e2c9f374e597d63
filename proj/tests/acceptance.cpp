// Acceptance gate for the chain laboratory: fourteen numbered checks, one
// PASS/FAIL line each, nonzero exit when anything fails.  Every tolerance is
// pinned inline next to the quantity it bounds; reference values come from
// the frozen closed-form oracles, never from the code under test.
#include <algorithm>
#include <chrono>
#include <climits>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fk/aubry_mather.hpp"
#include "fk/chain.hpp"
#include "fk/errors.hpp"
#include "fk/forcing.hpp"
#include "fk/integrate.hpp"
#include "fk/measures.hpp"
#include "fk/potential.hpp"
#include "fk/rng.hpp"
#include "fk/sliding.hpp"
#include "fk/zeroset.hpp"
#include "oracles.hpp"

namespace {

constexpr std::uint64_t kMaster = 20260816ull; // fixed master seed: the suite is a function

int g_failed = 0;

void report(int idx, const char* label, bool ok, const std::string& detail) {
    std::printf("[%s] %2d %s%s%s\n", ok ? "PASS" : "FAIL", idx, label,
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failed;
}

template <typename Body>
void criterion(int idx, const char* label, Body&& body) {
    bool ok = false;
    std::string detail;
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        ok = false;
        detail = std::string("exception: ") + e.what();
    }
    report(idx, label, ok, detail);
}

std::string num(double v) {
    char b[48];
    std::snprintf(b, sizeof b, "%.3g", v);
    return b;
}

fk::ChainState random_state(int n, int m, double jitter, std::mt19937_64& g) {
    fk::ChainState s;
    s.n = n;
    s.m = m;
    s.u.resize(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j)
        s.u[static_cast<std::size_t>(j)] =
            static_cast<double>(m) / n * j + jitter * (2.0 * fk::u01(g) - 1.0);
    return s;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

int main() {
    const auto pot1 = fk::standard_potential(1.0);
    const double a_pin = 1.0 / oracles::two_pi; // K/2pi at K=1

    // 1. single-site depinning against the closed-form speed law
    criterion(1, "pendulum speed law", [&](std::string& d) {
        const auto tick = std::chrono::steady_clock::now();
        bool ok = true;
        double worst_dv = 0.0;
        for (double fm : {1.1, 1.5, 2.0}) {
            const double f = fm * a_pin;
            const fk::ChainState s{1, 0, 0.0, {0.37}};
            const auto rep = fk::classify_asymptotics(s, pot1, fk::dc_forcing(f), 120.0);
            const double v_ref = 1.0 / oracles::advance_time_closed_form(1.0, f);
            ok = ok && rep.verdict == fk::Verdict::periodic_sliding;
            worst_dv = std::max(worst_dv, std::abs(rep.v - v_ref));
            ok = ok && std::abs(rep.v - v_ref) <= 1e-5;
        }
        for (double fm : {0.5, 0.9}) {
            const double f = fm * a_pin;
            const fk::ChainState s{1, 0, 0.0, {0.37}};
            const auto rep = fk::classify_asymptotics(s, pot1, fk::dc_forcing(f), 120.0);
            ok = ok && rep.verdict == fk::Verdict::equilibrium && std::abs(rep.v) <= 1e-8;
        }
        const double el = seconds_since(tick);
        ok = ok && el <= 10.0;
        d = "worst |v - v_ref| " + num(worst_dv) + ", " + num(el) + " s";
        return ok;
    });

    // 2. harmonic chain: drift equals the drive exactly, dissipation closes
    criterion(2, "harmonic chain exactness", [&](std::string& d) {
        const auto pot = fk::standard_potential(0.0);
        const auto force = fk::dc_forcing(0.7);
        auto g = fk::seeded_engine(kMaster, "accept/c2");
        const auto s = random_state(3, 1, 0.45, g);
        const auto rep = fk::classify_asymptotics(s, pot, force, 60.0);
        bool ok = rep.verdict == fk::Verdict::periodic_sliding && std::abs(rep.v - 0.7) <= 1e-10;
        const auto& settled = rep.tail.states.back();
        const double t_end = rep.tail.times.back();
        const auto trace = fk::integrate_with_dissipation(settled, pot, force, t_end,
                                                          t_end + 1.05 * rep.t0 + 1.0);
        const double res = fk::dissipation_residual(trace, pot, force, rep);
        ok = ok && res <= 1e-10;
        d = "|v - F| " + num(std::abs(rep.v - 0.7)) + ", dissipation residual " + num(res);
        return ok;
    });

    // 3 + 4 share one sweep over the seeded difference trajectories
    struct {
        bool ran = false;
        bool mono_ok = true;
        long long samples = 0;
        int worst_jump = 0;
    } c34;

    criterion(3, "zero-balance audit", [&](std::string& d) {
        const auto tick = std::chrono::steady_clock::now();
        bool ok = true;
        long long disappearances = 0, crossings = 0, residual_fail = 0, table_fail = 0;
        for (int fi = 0; fi < 2; ++fi) {
            const auto force = fk::dc_forcing(fi == 0 ? 0.0 : 0.05);
            for (int p = 0; p < 50; ++p) {
                const std::string tag =
                    "accept/c3/" + std::to_string(fi) + "/" + std::to_string(p);
                auto ga = fk::seeded_engine(kMaster, tag + "/a");
                // kink-carrying classes only: windless pairs settle into one
                // collective well, where both members can merge outright and
                // leave nothing to audit
                const int mw = 1 + p % 3;
                const auto sa = random_state(32, mw, 0.45, ga);
                // The half-cell offset keeps the settled difference on
                // kink-dense mismatches instead of long zero plateaus.  A
                // merged pair (identical limits, difference below tolerance
                // everywhere) has no zero set left to audit, so those rare
                // draws are redrawn deterministically from a salted label.
                fk::PairLinearResult res;
                bool live = false;
                for (int salt = 0; salt < 8 && !live; ++salt) {
                    auto gb = fk::seeded_engine(
                        kMaster, tag + "/b" + (salt ? std::to_string(salt) : ""));
                    auto sb = random_state(32, mw, 0.45, gb);
                    for (auto& x : sb.u) x += 0.5;
                    res = fk::integrate_linear_pair(sa, sb, {}, pot1, force, 0.0, 50.0);
                    double w_end = 0.0;
                    for (double x : res.w.w.back()) w_end = std::max(w_end, std::abs(x));
                    live = w_end > 1e-6;
                }
                if (!live) {
                    ok = false;
                    continue;
                }
                const auto led = fk::track_zero_events(res.w);
                const auto aud = fk::zero_balance_audit(led);
                if (!(aud.balanced && aud.max_abs_residual == 0)) {
                    ok = false;
                    ++residual_fail;
                }
                for (const auto& ev : led.events) {
                    if (ev.kind == fk::EventKind::crossing) {
                        ++crossings;
                        continue;
                    }
                    ++disappearances;
                    const int want =
                        ev.type == fk::SingularType::type_two ? ev.degree : ev.degree - 1;
                    if (ev.count != want) {
                        ok = false;
                        ++table_fail;
                    }
                }
                // criterion 4 rides along: the per-sample zero count of the
                // difference must never rise
                int prev = INT_MAX;
                for (const auto& w : res.w.w) {
                    double scale = 1.0;
                    for (double x : w) scale = std::max(scale, std::abs(x));
                    const int c = fk::count_zeros(w, 1e-10 * scale);
                    if (c > prev) {
                        c34.mono_ok = false;
                        c34.worst_jump = std::max(c34.worst_jump, c - prev);
                    }
                    prev = c;
                    ++c34.samples;
                }
            }
        }
        c34.ran = true;
        const double el = seconds_since(tick);
        ok = ok && el <= 300.0 && disappearances > 0 && crossings > 0;
        std::ostringstream os;
        os << disappearances << " disappearances, " << crossings << " crossings, "
           << residual_fail << " residual / " << table_fail << " table failures, " << num(el)
           << " s";
        d = os.str();
        return ok;
    });

    criterion(4, "monotone zero count", [&](std::string& d) {
        std::ostringstream os;
        os << c34.samples << " samples";
        if (!c34.mono_ok) os << ", worst upward jump " << c34.worst_jump;
        d = os.str();
        return c34.ran && c34.mono_ok;
    });

    // 5. crossing functional decreases along the flow, constant and periodic drive
    criterion(5, "crossing functional decay", [&](std::string& d) {
        bool ok = true;
        double worst_rise = 0.0;
        const auto run_block = [&](const fk::Forcing& force, double step, int legs,
                                   const char* tag) {
            auto ga = fk::seeded_engine(kMaster, std::string("accept/c5/") + tag + "/a");
            auto gb = fk::seeded_engine(kMaster, std::string("accept/c5/") + tag + "/b");
            std::vector<fk::ChainState> ma, mb;
            for (int i = 0; i < 16; ++i) {
                ma.push_back(random_state(32, 1, 0.45, ga));
                mb.push_back(random_state(32, 1, 0.45, gb));
            }
            auto ea = fk::uniform_ensemble(std::move(ma));
            auto eb = fk::uniform_ensemble(std::move(mb));
            double z_ab = fk::z_functional(ea, eb).value;
            double z_aa = fk::z_functional(ea, ea).value;
            for (int leg = 0; leg < legs; ++leg) {
                ea = fk::evolve_ensemble(ea, pot1, force, step);
                eb = fk::evolve_ensemble(eb, pot1, force, step);
                const double nab = fk::z_functional(ea, eb).value;
                const double naa = fk::z_functional(ea, ea).value;
                worst_rise = std::max({worst_rise, nab - z_ab, naa - z_aa});
                if (nab > z_ab + 1e-9 || naa > z_aa + 1e-9) ok = false;
                z_ab = nab;
                z_aa = naa;
            }
        };
        run_block(fk::dc_forcing(0.05), 0.5, 60, "dc");
        run_block(fk::ac_forcing(0.05, {{1, 0.0, 0.05}}), 1.0, 30, "ac");
        d = "worst rise " + num(worst_rise);
        return ok;
    });

    // 6. comparison principle and spacing-class invariance on ordered pairs
    criterion(6, "order and spacing preservation", [&](std::string& d) {
        const auto force = fk::dc_forcing(0.05);
        const fk::IntegrateOptions opt{1e-3, 0.05};
        bool ok = true;
        double worst_growth = -1.0;
        int order_fail = 0;
        for (int p = 0; p < 50; ++p) {
            auto g = fk::seeded_engine(kMaster, "accept/c6/" + std::to_string(p));
            const int mw = p % 3;
            auto sa = random_state(16, mw, 0.45, g);
            auto sb = sa;
            for (auto& x : sb.u) x += 0.5 * fk::u01(g);
            const auto ta = fk::integrate(sa, pot1, force, 0.0, 40.0, opt);
            const auto tb = fk::integrate(sb, pot1, force, 0.0, 40.0, opt);
            const double base_a = fk::spacing_bound(sa);
            const double base_b = fk::spacing_bound(sb);
            for (std::size_t k = 0; k < ta.states.size(); ++k) {
                const auto ord = fk::partial_order_compare(ta.states[k], tb.states[k], 1e-9);
                if (ord != fk::Order::less_equal && ord != fk::Order::equal) {
                    ok = false;
                    ++order_fail;
                }
                const double ga_ = fk::spacing_bound(ta.states[k]) - base_a;
                const double gb_ = fk::spacing_bound(tb.states[k]) - base_b;
                worst_growth = std::max({worst_growth, ga_, gb_});
            }
        }
        ok = ok && worst_growth <= 1e-7;
        std::ostringstream os;
        os << "worst spacing growth " << num(worst_growth);
        if (order_fail) os << ", " << order_fail << " order failures";
        d = os.str();
        return ok;
    });

    // 7 + 8: ordered invariant families, then the projection audit over them
    std::vector<fk::ChainState> pool;

    criterion(7, "ordered invariant construction", [&](std::string& d) {
        bool ok = true;
        double worst_width = 0.0, worst_defect = 0.0;
        const long long rho[3][2] = {{0, 1}, {1, 3}, {2, 5}};
        for (const auto& r : rho) {
            for (double f : {0.0, 0.4}) {
                const auto inv = fk::construct_ordered_invariant(r[0], r[1], pot1,
                                                                 fk::dc_forcing(f), 16, 200.0);
                worst_width = std::max(worst_width, inv.orderedness.width);
                worst_defect = std::max(worst_defect, inv.defect);
                ok = ok && inv.orderedness.ordered && inv.orderedness.width <= 1.0 + 1e-8 &&
                     inv.defect < 1e-5;
                for (const auto& mem : inv.ensemble.members) {
                    const auto rot = fk::rotation_number(mem.state);
                    ok = ok && rot.num == r[0] && rot.den == r[1];
                    pool.push_back(mem.state);
                }
            }
        }
        d = "worst width " + num(worst_width) + ", worst defect " + num(worst_defect);
        return ok;
    });

    criterion(8, "cylinder projection injectivity", [&](std::string& d) {
        // fold in snapshots of classified sliding orbits at other rotation numbers
        int orbit_samples = 0;
        const auto add_orbit = [&](const fk::ChainState& s, double f) {
            const auto rep = fk::classify_asymptotics(s, pot1, fk::dc_forcing(f), 120.0);
            if (rep.verdict != fk::Verdict::periodic_sliding) return;
            const std::size_t n = rep.tail.states.size();
            for (std::size_t k = n / 4; k < n; k += n / 4) {
                pool.push_back(rep.tail.states[k]);
                ++orbit_samples;
            }
        };
        add_orbit(fk::ChainState{1, 0, 0.0, {0.4}}, 0.5);
        auto g = fk::seeded_engine(kMaster, "accept/c8");
        add_orbit(random_state(8, 3, 0.45, g), 0.5);
        const auto rep = fk::injectivity_diagnostic(pool, 1e-4, 1e-6);
        const bool ok = orbit_samples > 0 && rep.checked_pairs > 0 && rep.violations == 0 &&
                        rep.singular_pairs == 0;
        std::ostringstream os;
        os << pool.size() << " states, " << rep.checked_pairs << " pairs, min gap "
           << num(rep.min_projection_gap) << ", " << rep.violations << " violations, "
           << rep.singular_pairs << " singular";
        d = os.str();
        return ok;
    });

    // 9-12 share one sweep of seeded constant-drive runs
    struct {
        bool ran = false;
        bool mod_ok = true, diss_ok = true, energy_ok = true;
        int accepted = 0;
        double worst_mod = 0.0, worst_rec = 0.0, worst_diss = 0.0, worst_energy_rise = -1.0;
        std::string mod_err;
    } tail_checks;

    criterion(9, "constant-drive trichotomy", [&](std::string& d) {
        bool ok = true;
        int undet_marginal = 0, undet_other = 0, n_eq = 0, n_per = 0, order_fail = 0;
        double worst_vt = 0.0;
        for (int i = 0; i < 50; ++i) {
            auto g = fk::seeded_engine(kMaster, "accept/c9/" + std::to_string(i));
            const int mw = i % 4;
            const auto s = random_state(8, mw, 0.45, g);
            for (double f : {0.0, 0.1, 0.5}) {
                // drive-free kink lattices equilibrate through exponentially
                // weak interactions; they need the long leash
                const double horizon = f == 0.0 ? 1200.0 : f == 0.1 ? 400.0 : 120.0;
                const auto force = fk::dc_forcing(f);
                const auto rep = fk::classify_asymptotics(s, pot1, force, horizon);
                if (rep.verdict == fk::Verdict::undetermined) {
                    if (f == 0.1)
                        ++undet_marginal;
                    else {
                        ++undet_other;
                        ok = false;
                    }
                    continue;
                }
                if (rep.verdict == fk::Verdict::equilibrium) {
                    ++n_eq;
                } else {
                    ++n_per;
                    worst_vt = std::max(worst_vt, std::abs(rep.v * rep.t0 - 1.0));
                    if (std::abs(rep.v * rep.t0 - 1.0) > 1e-5) ok = false;
                    // total-order spot check over spread tail samples
                    const auto& st = rep.tail.states;
                    const std::size_t step = std::max<std::size_t>(1, st.size() / 6);
                    std::vector<std::size_t> picks;
                    for (std::size_t k = 0; k < st.size(); k += step) picks.push_back(k);
                    for (std::size_t x = 0; x < picks.size(); ++x)
                        for (std::size_t y = x + 1; y < picks.size(); ++y)
                            if (fk::partial_order_compare(st[picks[x]], st[picks[y]], 1e-9) ==
                                fk::Order::incomparable) {
                                ok = false;
                                ++order_fail;
                            }
                    // criteria 10 and 11 ride on the accepted sliding runs
                    ++tail_checks.accepted;
                    try {
                        const auto tab = fk::extract_modulation(
                            rep.tail, static_cast<double>(mw) / 8.0, rep.v, 1024, 1e-4);
                        const double rec = fk::modulation_reconstruction_error(rep.tail, tab);
                        tail_checks.worst_mod = std::max(tail_checks.worst_mod, tab.residual);
                        tail_checks.worst_rec = std::max(tail_checks.worst_rec, rec);
                        if (tab.residual > 1e-4 || rec > 1e-4) tail_checks.mod_ok = false;
                    } catch (const std::exception& e) {
                        tail_checks.mod_ok = false;
                        tail_checks.mod_err = e.what();
                    }
                    const auto& settled = rep.tail.states.back();
                    const double t_end = rep.tail.times.back();
                    const auto trace = fk::integrate_with_dissipation(
                        settled, pot1, force, t_end, t_end + 1.05 * rep.t0 + 1.0);
                    const double res = fk::dissipation_residual(trace, pot1, force, rep);
                    tail_checks.worst_diss = std::max(tail_checks.worst_diss, res);
                    if (res > 1e-6) tail_checks.diss_ok = false;
                }
                // criterion 12 rides on the drive-free runs: sampled energy decay
                if (f == 0.0) {
                    const auto tr = fk::integrate(s, pot1, force, 0.0, 120.0,
                                                  fk::IntegrateOptions{1e-3, 0.1});
                    double prev = fk::energy_per_site(tr.states.front(), pot1);
                    for (std::size_t k = 1; k < tr.states.size(); ++k) {
                        const double e = fk::energy_per_site(tr.states[k], pot1);
                        tail_checks.worst_energy_rise =
                            std::max(tail_checks.worst_energy_rise, e - prev);
                        if (e > prev + 1e-9) tail_checks.energy_ok = false;
                        prev = e;
                    }
                }
            }
        }
        tail_checks.ran = true;
        ok = ok && undet_marginal * 20 <= 50; // at most 5% at the marginal drive
        std::ostringstream os;
        os << n_eq << " equilibria, " << n_per << " sliding, " << undet_marginal
           << " undetermined at F=0.1, " << undet_other << " elsewhere, worst |v*t0-1| "
           << num(worst_vt);
        if (order_fail) os << ", " << order_fail << " order failures";
        d = os.str();
        return ok;
    });

    criterion(10, "modulation extraction", [&](std::string& d) {
        std::ostringstream os;
        os << tail_checks.accepted << " sliding runs, worst residual "
           << num(tail_checks.worst_mod) << ", worst reconstruction "
           << num(tail_checks.worst_rec);
        if (!tail_checks.mod_err.empty()) os << ", error: " << tail_checks.mod_err;
        d = os.str();
        return tail_checks.ran && tail_checks.accepted > 0 && tail_checks.mod_ok;
    });

    criterion(11, "dissipation identity", [&](std::string& d) {
        d = "worst relative residual " + num(tail_checks.worst_diss);
        return tail_checks.ran && tail_checks.accepted > 0 && tail_checks.diss_ok;
    });

    criterion(12, "gradient energy decay", [&](std::string& d) {
        d = "worst sampled rise " + num(tail_checks.worst_energy_rise);
        return tail_checks.ran && tail_checks.energy_ok;
    });

    // 13. time spent near the detected rest states grows with the horizon
    criterion(13, "attractor residence", [&](std::string& d) {
        const auto force = fk::dc_forcing(0.0);
        auto g = fk::seeded_engine(kMaster, "accept/c13");
        std::vector<fk::ChainState> members;
        std::vector<fk::ChainState> rests;
        for (int i = 0; i < 16; ++i) {
            members.push_back(random_state(4, 0, 0.45, g));
            const auto rep = fk::classify_asymptotics(members.back(), pot1, force, 200.0);
            if (rep.verdict == fk::Verdict::equilibrium) rests.push_back(rep.tail.states.back());
        }
        if (rests.empty()) {
            d = "no equilibria detected";
            return false;
        }
        const auto a_hat = fk::close_under_translation(rests);
        const auto mu = fk::uniform_ensemble(members);
        const double f20 = fk::attractor_residence(mu, a_hat, pot1, force, 20.0, 1e-2, 200);
        const double f200 = fk::attractor_residence(mu, a_hat, pot1, force, 200.0, 1e-2, 200);
        std::ostringstream os;
        os << rests.size() << "/16 rest states, fraction " << num(f20) << " at S=20, "
           << num(f200) << " at S=200";
        d = os.str();
        return f200 > f20 && f200 > 0.9;
    });

    // 14. short-time Taylor law of engineered degenerate zeros
    criterion(14, "leading-coefficient expansion", [&](std::string& d) {
        const int n = 12, s0 = 4;
        fk::LinearCoeffs co;
        co.a.assign(n, 1.0); // left and right couplings deliberately unequal so
        co.b.assign(n, 2.0); // no interior coefficient cancels
        co.c.assign(n, -3.0);
        co.delta = 1.0;
        bool ok = true;
        double worst_rel = 0.0;
        for (int k : {1, 2, 3}) {
            for (int flank_right : {+1, -1}) { // +1 opposite flanks, -1 equal flanks
                std::vector<double> w(n);
                for (int j = 0; j < n; ++j)
                    w[static_cast<std::size_t>(j)] = j < s0 ? -1.0
                                                     : j < s0 + k
                                                         ? 0.0
                                                         : static_cast<double>(flank_right);
                const auto lead = fk::predict_leading_coeffs(w, co, s0, k, 1e-12);
                if (static_cast<int>(lead.size()) != k) {
                    ok = false;
                    continue;
                }
                std::vector<double> rel_prev;
                for (double t : {1e-3, 1e-4}) {
                    const fk::IntegrateOptions opt{t / 1000.0, t / 2.0};
                    const auto tr = fk::integrate_linear(w, co, 0.0, t, opt);
                    const auto& wt = tr.w.back();
                    for (int i = 0; i < k; ++i) {
                        const int order = lead[static_cast<std::size_t>(i)].order;
                        const double dref = lead[static_cast<std::size_t>(i)].coeff;
                        if (order != std::min(i + 1, k - i) || std::abs(dref) <= 1e-12) {
                            ok = false;
                            continue;
                        }
                        const double meas =
                            wt[static_cast<std::size_t>(s0 + i)] / std::pow(t, order);
                        const double rel = std::abs(meas - dref) / std::abs(dref);
                        if (t == 1e-3) {
                            worst_rel = std::max(worst_rel, rel);
                            if (rel > 0.05) ok = false;
                            rel_prev.push_back(rel);
                        } else {
                            if (rel >= rel_prev[static_cast<std::size_t>(i)]) ok = false;
                        }
                    }
                }
            }
        }
        d = "worst relative gap " + num(worst_rel) + " at t=1e-3";
        return ok;
    });

    std::printf("%s: %d/14 criteria passed\n", g_failed == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL",
                14 - g_failed);
    return g_failed == 0 ? 0 : 1;
}
