#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "fk/forcing.hpp"
#include "fk/integrate.hpp"
#include "fk/potential.hpp"

namespace fk {

// every pinned tolerance knob, overridable from the config file
struct RunTolerances {
    double tol_zero = 1e-10;
    double tol_event = 1e-9;
    double tol_tangency = 1e-8;
    double tol_z = 1e-9;
    double tol_eq = 1e-8;
    double tol_per = 1e-6;
    double tol_v = 1e-8;
    double tol_m = 1e-4;
    double eps_c = 1e-4;
    double eps_pi = 1e-6;
};

struct RunConfig {
    nlohmann::json doc; // effective document; command sections are read from here
    Potential potential;
    Forcing forcing;
    int n = 1;
    int m = 0;
    IntegrateOptions integrator;
    double horizon = 50.0;
    RunTolerances tol;
    std::uint64_t seed = 0;
    std::string out_dir = ".";
};

// builds the typed view and validates the shared sections; throws
// config_error naming the offending key
RunConfig parse_config(nlohmann::json doc);
RunConfig load_config(const std::string& path);

// raw document read, for callers that apply overrides before parsing
nlohmann::json load_document(const std::string& path);

// applies one "dotted.key=value" assignment onto the document; the value is
// parsed as JSON when it scans, otherwise taken as a string
void apply_override(nlohmann::json& doc, const std::string& assignment);

// order-independent content hash of the effective document (object keys
// serialize sorted), printed as 16 hex digits in manifests
std::uint64_t config_hash(const nlohmann::json& doc);
std::string hash_hex(std::uint64_t h);

} // namespace fk
