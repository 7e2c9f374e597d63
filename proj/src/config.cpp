#include "fk/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "fk/errors.hpp"
#include "fk/rng.hpp"

namespace fk {

namespace {

const nlohmann::json* find(const nlohmann::json& doc, const char* key) {
    const auto it = doc.find(key);
    return it == doc.end() ? nullptr : &*it;
}

double need_positive(const nlohmann::json& j, const std::string& key, double fallback) {
    const auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_number()) throw config_error("config: '" + key + "' must be a number");
    const double v = it->get<double>();
    if (!(v > 0.0) || !std::isfinite(v))
        throw config_error("config: '" + key + "' must be positive");
    return v;
}

} // namespace

RunConfig parse_config(nlohmann::json doc) {
    if (!doc.is_object()) throw config_error("config: top level must be an object");
    RunConfig cfg;

    if (const auto* p = find(doc, "potential")) {
        const auto fam = p->value("family", std::string("standard"));
        if (fam != "standard")
            throw config_error("config: 'potential.family' must be \"standard\" here; "
                               "other families are library-only");
        const double k = p->value("K", 1.0);
        if (!std::isfinite(k) || k < 0.0)
            throw config_error("config: 'potential.K' must be finite and nonnegative");
        cfg.potential = standard_potential(k);
    } else {
        cfg.potential = standard_potential(1.0);
    }

    if (const auto* f = find(doc, "forcing")) {
        const auto kind = f->value("kind", std::string("dc"));
        if (kind == "dc") {
            const double val = f->value("F", 0.0);
            if (!std::isfinite(val)) throw config_error("config: 'forcing.F' must be finite");
            cfg.forcing = dc_forcing(val);
        } else if (kind == "ac") {
            const double mean = f->value("mean", 0.0);
            if (!std::isfinite(mean))
                throw config_error("config: 'forcing.mean' must be finite");
            std::vector<Forcing::Harmonic> hs;
            if (const auto* arr = find(*f, "harmonics")) {
                if (!arr->is_array())
                    throw config_error("config: 'forcing.harmonics' must be an array");
                for (const auto& h : *arr) {
                    Forcing::Harmonic one;
                    one.n = h.value("n", 1);
                    one.c = h.value("cos", 0.0);
                    one.s = h.value("sin", 0.0);
                    if (one.n < 1)
                        throw config_error("config: 'forcing.harmonics.n' must be >= 1");
                    hs.push_back(one);
                }
            }
            cfg.forcing = ac_forcing(mean, hs);
        } else {
            throw config_error("config: 'forcing.kind' must be \"dc\" or \"ac\"");
        }
    } else {
        cfg.forcing = dc_forcing(0.0);
    }

    if (const auto* l = find(doc, "lattice")) {
        cfg.n = l->value("N", 1);
        cfg.m = l->value("M", 0);
    }
    if (cfg.n < 1) throw config_error("config: 'lattice.N' must be >= 1");

    if (const auto* i = find(doc, "integrator")) {
        cfg.integrator.dt = need_positive(*i, "dt", cfg.integrator.dt);
        cfg.integrator.dt_out = need_positive(*i, "dt_out", cfg.integrator.dt_out);
        cfg.horizon = need_positive(*i, "horizon", cfg.horizon);
    }
    if (!(cfg.integrator.dt < cfg.integrator.dt_out))
        throw config_error("config: 'integrator.dt' must be smaller than 'integrator.dt_out'");

    if (const auto* t = find(doc, "tolerances")) {
        cfg.tol.tol_zero = need_positive(*t, "tol_zero", cfg.tol.tol_zero);
        cfg.tol.tol_event = need_positive(*t, "tol_event", cfg.tol.tol_event);
        cfg.tol.tol_tangency = need_positive(*t, "tol_tangency", cfg.tol.tol_tangency);
        cfg.tol.tol_z = need_positive(*t, "tol_Z", cfg.tol.tol_z);
        cfg.tol.tol_eq = need_positive(*t, "tol_eq", cfg.tol.tol_eq);
        cfg.tol.tol_per = need_positive(*t, "tol_per", cfg.tol.tol_per);
        cfg.tol.tol_v = need_positive(*t, "tol_v", cfg.tol.tol_v);
        cfg.tol.tol_m = need_positive(*t, "tol_m", cfg.tol.tol_m);
        cfg.tol.eps_c = need_positive(*t, "eps_c", cfg.tol.eps_c);
        cfg.tol.eps_pi = need_positive(*t, "eps_pi", cfg.tol.eps_pi);
    }

    if (const auto* s = find(doc, "seed")) {
        if (!s->is_number_integer() && !s->is_number_unsigned())
            throw config_error("config: 'seed' must be an integer");
        cfg.seed = s->get<std::uint64_t>();
    }
    if (const auto* o = find(doc, "out")) {
        if (!o->is_string()) throw config_error("config: 'out' must be a string");
        cfg.out_dir = o->get<std::string>();
    }

    cfg.doc = std::move(doc);
    return cfg;
}

nlohmann::json load_document(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("config: cannot open '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw config_error("config: '" + path + "' is not valid JSON: " + e.what());
    }
    return doc;
}

RunConfig load_config(const std::string& path) { return parse_config(load_document(path)); }

void apply_override(nlohmann::json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw config_error("config: override '" + assignment + "' is not key=value");
    const std::string key = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);

    std::string pointer = "/";
    for (char c : key) pointer += (c == '.') ? '/' : c;

    nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw; // plain string value
    try {
        doc[nlohmann::json::json_pointer(pointer)] = value;
    } catch (const nlohmann::json::exception&) {
        throw config_error("config: cannot apply override at key '" + key + "'");
    }
}

std::uint64_t config_hash(const nlohmann::json& doc) {
    return fnv1a64(doc.dump()); // object keys serialize sorted: canonical bytes
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace fk
