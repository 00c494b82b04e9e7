#pragma once

// Uniform result record for every numerical verification the library runs.
// A check compares a computed `value` against an `oracle` obtained by an
// independent route and passes iff |value - oracle| <= tolerance.

#include <cmath>
#include <string>

namespace bundlecurv {

struct CheckResult {
    std::string check;       ///< stable machine-readable name
    bool pass = false;
    double value = 0.0;      ///< quantity computed by the route under test
    double oracle = 0.0;     ///< reference value from the independent route
    double tolerance = 0.0;
    double margin = 0.0;     ///< tolerance - |value - oracle|; >= 0 iff pass
    std::string provenance;  ///< how the oracle was obtained ("closed-form", ...)
    std::string details;     ///< free-form diagnostics

    static CheckResult against(std::string name, double value, double oracle, double tolerance,
                               std::string provenance, std::string details = {}) {
        CheckResult r;
        r.check = std::move(name);
        r.value = value;
        r.oracle = oracle;
        r.tolerance = tolerance;
        r.margin = tolerance - std::abs(value - oracle);
        r.pass = std::isfinite(value) && std::isfinite(oracle) && r.margin >= 0.0;
        r.provenance = std::move(provenance);
        r.details = std::move(details);
        return r;
    }
};

}  // namespace bundlecurv
