#pragma once

#include <stdexcept>
#include <string>

namespace fk {

// invalid or inconsistent run configuration / input contract violation
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// numerical failure: non-finite state, blow-up, unresolvable localization
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// a structural audit failed (balance residual, monotonicity, twist check)
struct audit_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace fk
