#pragma once
// Acceptance suite: numbered end-to-end checks, each with frozen seeds and
// thresholds pinned in code.  The quick profile runs only the fast analytic
// and combinatorial subset; the full profile runs everything.

#include <functional>
#include <string>
#include <vector>

namespace gfp {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    bool skipped = false;
    std::string detail;
    double seconds = 0.0;
};

enum class AcceptProfile { Quick, Full };

const std::vector<std::string>& criterion_names();

std::vector<CriterionResult> run_acceptance(
    AcceptProfile profile,
    const std::function<void(const CriterionResult&)>& on_done = nullptr);

// Timing-free JSON so repeated runs are byte-identical.
std::string acceptance_json(const std::vector<CriterionResult>& results);

// True when every executed criterion passed.
bool acceptance_pass(const std::vector<CriterionResult>& results);

} // namespace gfp
