#ifndef SPLITFACTOR_ACCEPTANCE_HPP
#define SPLITFACTOR_ACCEPTANCE_HPP

#include <string>
#include <vector>

#include "splitfactor/verify.hpp"

namespace splitfactor {

// Runs one acceptance criterion (1..8) and returns its sub-reports, the last
// of which is the runtime-budget line.  Every report passing means the
// criterion holds.
std::vector<TestReport> run_criterion(int which, UnitValue master_seed);

// Suite names accepted by the CLI: coupling, finite, factor, homomorphism,
// finitary, all.
std::vector<int> criteria_for_suite(const std::string& suite);

inline bool all_pass(const std::vector<TestReport>& reports) {
    for (const auto& r : reports)
        if (!r.pass) return false;
    return true;
}

}  // namespace splitfactor

#endif
