#pragma once

#include <string>
#include <vector>

namespace darwin {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;  // measured quantities, human readable
};

struct SuiteReport {
    std::string suite;
    bool passed = false;
    std::vector<CheckResult> checks;
};

/// Built-in verification suites: "operators" (mimetic identities and material
/// matrix properties on randomized grids), "conservation" (per-step discrete
/// charge conservation on a driven conductor), "convergence" (first-order
/// self-convergence against a fine-step reference), "oracle" (iterative vs
/// dense-LU cross checks). "all" runs every suite.
SuiteReport verify_suite(const std::string& suite, unsigned long seed);
std::vector<SuiteReport> verify_suites(const std::string& suite, unsigned long seed);

std::string report_json(const std::vector<SuiteReport>& reports);

}  // namespace darwin
