#include "fk/run.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "fk/aubry_mather.hpp"
#include "fk/errors.hpp"
#include "fk/measures.hpp"
#include "fk/rng.hpp"
#include "fk/sliding.hpp"
#include "fk/zeroset.hpp"

namespace fk {

namespace {

namespace fs = std::filesystem;

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::ofstream open_artifact(const RunConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.out_dir);
    std::ofstream out(fs::path(cfg.out_dir) / name, std::ios::binary);
    if (!out) throw config_error("run: cannot write '" + name + "' under '" + cfg.out_dir + "'");
    return out;
}

void write_manifest(const RunConfig& cfg, const std::string& command,
                    std::vector<std::string> artifacts, nlohmann::json results) {
    artifacts.push_back("manifest.json");
    std::sort(artifacts.begin(), artifacts.end());
    nlohmann::json man;
    man["command"] = command;
    man["config_hash"] = hash_hex(config_hash(cfg.doc));
    man["seed"] = cfg.seed;
    man["artifacts"] = artifacts;
    man["results"] = std::move(results);
    auto out = open_artifact(cfg, "manifest.json");
    out << man.dump(2) << "\n";
}

const nlohmann::json& section(const RunConfig& cfg, const std::string& command) {
    static const nlohmann::json empty = nlohmann::json::object();
    const auto it = cfg.doc.find(command);
    if (it == cfg.doc.end()) return empty;
    if (!it->is_object()) throw config_error("config: '" + command + "' must be an object");
    return *it;
}

SlideTolerances slide_tol(const RunConfig& cfg) {
    SlideTolerances t;
    t.tol_eq = cfg.tol.tol_eq;
    t.tol_v = cfg.tol.tol_v;
    t.tol_per = cfg.tol.tol_per;
    t.tol_m = cfg.tol.tol_m;
    return t;
}

ZeroTolerances zero_tol(const RunConfig& cfg) {
    ZeroTolerances t;
    t.zero_rel = cfg.tol.tol_zero;
    t.event_time = cfg.tol.tol_event;
    t.tangency_rel = cfg.tol.tol_tangency;
    return t;
}

// linear profile at the configured rotation number, optionally jittered from
// the labelled deterministic stream
ChainState seeded_state(const RunConfig& cfg, double jitter, const std::string& label) {
    ChainState s;
    s.n = cfg.n;
    s.m = cfg.m;
    s.u.resize(cfg.n);
    auto g = seeded_engine(cfg.seed, label);
    const double rho = static_cast<double>(cfg.m) / cfg.n;
    for (int j = 0; j < cfg.n; ++j)
        s.u[j] = rho * j + (jitter > 0.0 ? jitter * (2.0 * u01(g) - 1.0) : 0.0);
    return s;
}

ChainState state_from_json(const RunConfig& cfg, const nlohmann::json& arr,
                           const std::string& key) {
    if (!arr.is_array() || static_cast<int>(arr.size()) != cfg.n)
        throw config_error("config: '" + key + "' must be an array of lattice.N numbers");
    ChainState s;
    s.n = cfg.n;
    s.m = cfg.m;
    for (const auto& v : arr) {
        if (!v.is_number()) throw config_error("config: '" + key + "' must hold numbers");
        s.u.push_back(v.get<double>());
    }
    validate_state(s);
    return s;
}

const char* verdict_name(Verdict v) {
    switch (v) {
    case Verdict::equilibrium: return "equilibrium";
    case Verdict::periodic_sliding: return "periodic_sliding";
    default: return "undetermined";
    }
}

nlohmann::json state_to_json(const ChainState& s) {
    nlohmann::json j;
    j["N"] = s.n;
    j["M"] = s.m;
    j["t"] = s.t;
    j["u"] = s.u;
    return j;
}

nlohmann::json ensemble_to_json(const Ensemble& e) {
    nlohmann::json j;
    j["N"] = e.members.front().state.n;
    j["M"] = e.members.front().state.m;
    j["members"] = nlohmann::json::array();
    for (const auto& mem : e.members) {
        nlohmann::json one = state_to_json(mem.state);
        one["weight"] = mem.weight;
        j["members"].push_back(std::move(one));
    }
    return j;
}

Ensemble seeded_ensemble(const RunConfig& cfg, int count, double jitter,
                         const std::string& label) {
    if (count < 1) throw config_error("config: '" + label + ".members' must be >= 1");
    std::vector<ChainState> states;
    states.reserve(count);
    for (int i = 0; i < count; ++i)
        states.push_back(seeded_state(cfg, jitter, label + "/" + std::to_string(i)));
    return uniform_ensemble(std::move(states));
}

void run_simulate(const RunConfig& cfg) {
    const auto& sec = section(cfg, "simulate");
    ChainState s0 = sec.contains("initial")
                        ? state_from_json(cfg, sec.at("initial"), "simulate.initial")
                        : seeded_state(cfg, sec.value("jitter", 0.0), "simulate/initial");
    const int bins = sec.value("bins", 256);

    const auto tr = integrate(s0, cfg.potential, cfg.forcing, 0.0, cfg.horizon, cfg.integrator);
    {
        auto out = open_artifact(cfg, "trajectory.csv");
        out << "t";
        for (int j = 0; j < cfg.n; ++j) out << ",u_" << j;
        out << "\n";
        for (std::size_t k = 0; k < tr.times.size(); ++k) {
            out << fmt(tr.times[k]);
            for (int j = 0; j < cfg.n; ++j) out << "," << fmt(tr.states[k].u[j]);
            out << "\n";
        }
    }

    nlohmann::json rep_json;
    std::vector<std::string> artifacts{"trajectory.csv", "asymptotics.json"};
    nlohmann::json results;
    if (cfg.forcing.kind == Forcing::Kind::dc) {
        const auto rep = classify_asymptotics(s0, cfg.potential, cfg.forcing, cfg.horizon,
                                              slide_tol(cfg), cfg.integrator);
        rep_json["verdict"] = verdict_name(rep.verdict);
        rep_json["v"] = rep.v;
        rep_json["t0"] = rep.t0;
        rep_json["residual_eq"] = rep.residual_eq;
        rep_json["residual_per"] = rep.residual_per;
        rep_json["site_spread"] = rep.site_spread;
        rep_json["final_state"] = state_to_json(rep.final_state);
        results["verdict"] = verdict_name(rep.verdict);
        results["v"] = rep.v;
        results["t0"] = rep.t0;

        if (rep.verdict == Verdict::periodic_sliding) {
            const double rho = static_cast<double>(cfg.m) / cfg.n;
            const auto tab = extract_modulation(rep.tail, rho, rep.v, bins, cfg.tol.tol_m);
            auto out = open_artifact(cfg, "modulation.csv");
            out << "x,m,count,spread\n";
            for (std::size_t b = 0; b < tab.x.size(); ++b)
                out << fmt(tab.x[b]) << "," << fmt(tab.m[b]) << "," << tab.count[b] << ","
                    << fmt(tab.spread[b]) << "\n";
            artifacts.push_back("modulation.csv");
            rep_json["modulation_residual"] = tab.residual;
        }
    } else {
        // AC runs carry no rest/period theory here; report the raw tail drift
        Trajectory tail;
        const double t_half = cfg.horizon * 0.5;
        for (std::size_t k = 0; k < tr.times.size(); ++k) {
            if (tr.times[k] < t_half) continue;
            tail.times.push_back(tr.times[k]);
            tail.states.push_back(tr.states[k]);
        }
        const auto est = average_speed(tail);
        rep_json["verdict"] = "undetermined";
        rep_json["v"] = est.v;
        rep_json["site_spread"] = est.site_spread;
        rep_json["final_state"] = state_to_json(tr.states.back());
        results["verdict"] = "undetermined";
        results["v"] = est.v;
    }
    {
        auto out = open_artifact(cfg, "asymptotics.json");
        out << rep_json.dump(2) << "\n";
    }
    write_manifest(cfg, "simulate", std::move(artifacts), std::move(results));
}

void run_zero_audit(const RunConfig& cfg) {
    const auto& sec = section(cfg, "zero-audit");
    const double jitter = sec.value("jitter", 0.45);
    const ChainState a = sec.contains("a") ? state_from_json(cfg, sec.at("a"), "zero-audit.a")
                                           : seeded_state(cfg, jitter, "zero-audit/a");
    const ChainState b = sec.contains("b") ? state_from_json(cfg, sec.at("b"), "zero-audit.b")
                                           : seeded_state(cfg, jitter, "zero-audit/b");

    const auto pair = integrate_linear_pair(a, b, {}, cfg.potential, cfg.forcing, 0.0,
                                            cfg.horizon, cfg.integrator);
    const auto led = track_zero_events(pair.w, zero_tol(cfg));
    {
        auto out = open_artifact(cfg, "ledger.csv");
        write_zero_ledger_csv(led, out);
    }

    const auto audit = zero_balance_audit(led);
    nlohmann::json aj;
    aj["balanced"] = audit.balanced;
    aj["max_abs_residual"] = audit.max_abs_residual;
    aj["worst_window"] = {audit.worst_m, audit.worst_n};
    aj["full_window_residual"] = audit.full_window_residual;
    aj["z_start"] = led.z_start;
    aj["z_end"] = led.z_end;
    aj["events"] = led.events.size();
    aj["tangencies"] = led.tangencies.size();
    {
        auto out = open_artifact(cfg, "audit.json");
        out << aj.dump(2) << "\n";
    }

    nlohmann::json results;
    results["balanced"] = audit.balanced;
    results["events"] = led.events.size();
    write_manifest(cfg, "zero-audit", {"ledger.csv", "audit.json"}, std::move(results));
    if (!audit.balanced)
        throw audit_error("zero-audit: balance residual " +
                          std::to_string(audit.max_abs_residual) + " on window [" +
                          std::to_string(audit.worst_m) + "," + std::to_string(audit.worst_n) +
                          ")");
}

void run_measure(const RunConfig& cfg) {
    const auto& sec = section(cfg, "measure");
    const double jitter = sec.value("jitter", 0.45);
    Ensemble a = seeded_ensemble(cfg, sec.value("members", 8), jitter, "measure/a");
    const bool paired = sec.contains("second");
    Ensemble b;
    if (paired) {
        const auto& ss = sec.at("second");
        if (!ss.is_object()) throw config_error("config: 'measure.second' must be an object");
        b = seeded_ensemble(cfg, ss.value("members", 8), ss.value("jitter", jitter),
                            "measure/b");
    }

    const bool ac = cfg.forcing.kind == Forcing::Kind::ac;
    std::vector<double> times;
    if (ac) {
        // the weak-Lyapunov property holds stroboscopically under 1-periodic drive
        const int last = static_cast<int>(std::floor(cfg.horizon + 1e-12));
        if (last < 1)
            throw config_error("config: 'integrator.horizon' must reach t = 1 for ac runs");
        for (int k = 0; k <= last; ++k) times.push_back(k);
    } else {
        const int samples = sec.value("samples", 50);
        if (samples < 1) throw config_error("config: 'measure.samples' must be >= 1");
        for (int k = 0; k <= samples; ++k) times.push_back(cfg.horizon * k / samples);
    }

    auto out = open_artifact(cfg, "z_series.csv");
    out << "t,Z,Zself,Ztilde,stat_err\n";
    double z_first = 0.0, z_last = 0.0, worst_rise = 0.0, prev = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (k > 0) {
            const double step = times[k] - times[k - 1];
            a = evolve_ensemble(a, cfg.potential, cfg.forcing, step, cfg.integrator);
            if (paired) b = evolve_ensemble(b, cfg.potential, cfg.forcing, step, cfg.integrator);
        }
        const auto z = paired ? z_functional(a, b, cfg.seed) : z_functional(a, a, cfg.seed);
        const auto zself = paired ? z_functional(a, a, cfg.seed) : z;
        out << fmt(times[k]) << "," << fmt(z.value) << "," << fmt(zself.value) << ",";
        if (!ac) out << fmt(z_derivative_functional(a, cfg.potential, cfg.forcing));
        out << "," << fmt(z.stat_err) << "\n";

        if (k == 0) z_first = z.value;
        else worst_rise = std::max(worst_rise, z.value - prev);
        z_last = z.value;
        prev = z.value;
    }
    out.close();

    {
        auto ej = open_artifact(cfg, "ensemble.json");
        ej << ensemble_to_json(a).dump(2) << "\n";
    }

    nlohmann::json results;
    results["z_first"] = z_first;
    results["z_last"] = z_last;
    results["worst_rise"] = worst_rise;
    results["monotone_within_tol"] = worst_rise <= cfg.tol.tol_z;
    write_manifest(cfg, "measure", {"z_series.csv", "ensemble.json"}, std::move(results));
}

void run_am(const RunConfig& cfg) {
    const auto& sec = section(cfg, "am");
    if (!sec.contains("num") || !sec.contains("den") || !sec.at("num").is_number_integer() ||
        !sec.at("den").is_number_integer())
        throw config_error("config: 'am.num' and 'am.den' must be integers");
    const long long num = sec.at("num").get<long long>();
    const long long den = sec.at("den").get<long long>();
    const int n_avg = sec.value("n_avg", 16);
    const double transient = sec.value("transient", 200.0);
    const double dc_dt = sec.value("dc_dt", 1.0);

    const auto inv = construct_ordered_invariant(num, den, cfg.potential, cfg.forcing, n_avg,
                                                 transient, slide_tol(cfg), cfg.integrator);
    {
        auto out = open_artifact(cfg, "ensemble.json");
        out << ensemble_to_json(inv.ensemble).dump(2) << "\n";
    }
    nlohmann::json oj;
    oj["ordered"] = inv.orderedness.ordered;
    oj["width"] = inv.orderedness.width;
    oj["violation"] = inv.orderedness.violation;
    oj["verdict"] = verdict_name(inv.verdict);
    oj["t0"] = inv.t0;
    oj["defect"] = inv.defect;
    {
        auto out = open_artifact(cfg, "orderedness.json");
        out << oj.dump(2) << "\n";
    }
    {
        std::vector<ChainState> states;
        for (const auto& mem : inv.ensemble.members) states.push_back(mem.state);
        const auto rows = characteristic_map_samples(states, cfg.potential, cfg.forcing, dc_dt,
                                                     cfg.integrator);
        auto out = open_artifact(cfg, "characteristic.csv");
        write_characteristic_csv(rows, out);
    }

    nlohmann::json results;
    results["verdict"] = verdict_name(inv.verdict);
    results["t0"] = inv.t0;
    results["defect"] = inv.defect;
    results["width"] = inv.orderedness.width;
    write_manifest(cfg, "am", {"ensemble.json", "orderedness.json", "characteristic.csv"},
                   std::move(results));
}

void run_depin(const RunConfig& cfg) {
    const auto& sec = section(cfg, "depin");
    std::vector<double> grid;
    if (sec.contains("f_grid")) {
        for (const auto& v : sec.at("f_grid")) {
            if (!v.is_number()) throw config_error("config: 'depin.f_grid' must hold numbers");
            grid.push_back(v.get<double>());
        }
    } else if (sec.contains("f_min") && sec.contains("f_max") && sec.contains("count")) {
        const double lo = sec.at("f_min").get<double>();
        const double hi = sec.at("f_max").get<double>();
        const int count = sec.at("count").get<int>();
        if (count < 2 || !(hi > lo))
            throw config_error("config: 'depin' range needs f_max > f_min and count >= 2");
        for (int k = 0; k < count; ++k)
            grid.push_back(lo + (hi - lo) * k / (count - 1));
    } else {
        throw config_error("config: 'depin.f_grid' or f_min/f_max/count is required");
    }
    const double horizon = sec.value("horizon", cfg.horizon);

    const auto sweep = depinning_sweep(cfg.potential, cfg.n, cfg.m, grid, horizon,
                                       slide_tol(cfg), cfg.integrator);
    {
        auto out = open_artifact(cfg, "depin.csv");
        write_depin_csv(sweep, out);
    }
    nlohmann::json results;
    results["f_c"] = sweep.f_c;
    results["f_c_found"] = sweep.f_c_found;
    results["monotone_ok"] = sweep.monotone_ok;
    write_manifest(cfg, "depin", {"depin.csv"}, std::move(results));
}

void run_residence(const RunConfig& cfg) {
    const auto& sec = section(cfg, "residence");
    const int members = sec.value("members", 16);
    const double jitter = sec.value("jitter", 0.45);
    const double relax = sec.value("relax", 50.0);
    const double eps = sec.value("eps", 1e-2);
    const int samples = sec.value("samples", 100);
    std::vector<double> s_values{20.0, 200.0};
    if (sec.contains("s_values")) {
        s_values.clear();
        for (const auto& v : sec.at("s_values")) {
            if (!v.is_number())
                throw config_error("config: 'residence.s_values' must hold numbers");
            s_values.push_back(v.get<double>());
        }
        if (s_values.empty()) throw config_error("config: 'residence.s_values' is empty");
    }

    const auto mu = seeded_ensemble(cfg, members, jitter, "residence/member");
    std::vector<ChainState> rests;
    for (const auto& mem : mu.members) {
        const auto rep = classify_asymptotics(mem.state, cfg.potential, cfg.forcing, relax,
                                              slide_tol(cfg), cfg.integrator);
        if (rep.verdict == Verdict::equilibrium) rests.push_back(rep.final_state);
    }
    if (rests.empty())
        throw config_error("residence: no equilibria detected over the relax horizon; "
                           "raise 'residence.relax' or lower the drive");
    const auto a_hat = close_under_translation(rests);

    auto out = open_artifact(cfg, "residence.csv");
    out << "S,fraction\n";
    nlohmann::json fr = nlohmann::json::array();
    for (double s : s_values) {
        const double f = attractor_residence(mu, a_hat, cfg.potential, cfg.forcing, s, eps,
                                             samples, cfg.integrator);
        out << fmt(s) << "," << fmt(f) << "\n";
        fr.push_back({{"S", s}, {"fraction", f}});
    }
    out.close();

    nlohmann::json results;
    results["fractions"] = std::move(fr);
    results["reference_states"] = rests.size();
    write_manifest(cfg, "residence", {"residence.csv"}, std::move(results));
}

void run_report(const RunConfig& cfg) {
    const auto& sec = section(cfg, "report");
    if (!sec.contains("inputs") || !sec.at("inputs").is_array() || sec.at("inputs").empty())
        throw config_error("config: 'report.inputs' must be a non-empty array of paths");

    nlohmann::json runs = nlohmann::json::array();
    for (const auto& item : sec.at("inputs")) {
        if (!item.is_string())
            throw config_error("config: 'report.inputs' must hold path strings");
        fs::path p = item.get<std::string>();
        if (fs::is_directory(p)) p /= "manifest.json";
        std::ifstream in(p);
        if (!in) throw config_error("report: cannot open '" + p.string() + "'");
        nlohmann::json man;
        try {
            in >> man;
        } catch (const nlohmann::json::exception& e) {
            throw config_error("report: '" + p.string() + "' is not valid JSON: " + e.what());
        }
        man["path"] = p.string();
        runs.push_back(std::move(man));
    }

    nlohmann::json rep;
    rep["config_hash"] = hash_hex(config_hash(cfg.doc));
    rep["runs"] = runs;
    {
        auto out = open_artifact(cfg, "report.json");
        out << rep.dump(2) << "\n";
    }
    nlohmann::json results;
    results["runs"] = runs.size();
    write_manifest(cfg, "report", {"report.json"}, std::move(results));
}

} // namespace

void execute(const std::string& command, const RunConfig& cfg) {
    if (command == "simulate") return run_simulate(cfg);
    if (command == "zero-audit") return run_zero_audit(cfg);
    if (command == "measure") return run_measure(cfg);
    if (command == "am") return run_am(cfg);
    if (command == "depin") return run_depin(cfg);
    if (command == "residence") return run_residence(cfg);
    if (command == "report") return run_report(cfg);
    throw config_error("run: unknown command '" + command + "'");
}

} // namespace fk
