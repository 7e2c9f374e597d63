#pragma once

#include <string>

#include "fk/config.hpp"

namespace fk {

// Executes one batch command ("simulate", "zero-audit", "measure", "am",
// "depin", "residence", "report"); artifacts land in cfg.out_dir and every
// command finishes by writing manifest.json there.  Throws config_error,
// numeric_error, or audit_error; the binary maps those to exit codes 2/3/4.
void execute(const std::string& command, const RunConfig& cfg);

} // namespace fk
