#pragma once

#include <string>
#include <vector>

namespace depwise {

struct PropResult {
    std::string name;
    bool pass = false;
    double millis = 0.0;
    std::string detail;
};

// Suites: "tpr" (bind/unbind recovery, crosstalk scale), "grad" (op and
// full-model finite-difference checks), "noise" (exact-mode distractor
// invariants), "bfs" (brute-force path oracle), or "all".
std::vector<PropResult> run_prop_suite(const std::string& suite);

bool all_passed(const std::vector<PropResult>& results);

}  // namespace depwise
