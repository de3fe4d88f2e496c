#pragma once

#include "json.hpp"

#include <string>
#include <vector>

namespace anisoft::acceptance {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool passed = false;
    std::string summary;       // one line of headline numbers
    nlohmann::ordered_json metrics;
};

/// Criteria 1..10. Each runs at its pinned sizes and seeds.
CriterionResult criterion(int id);
inline constexpr int kCriteria = 10;

std::vector<CriterionResult> run(const std::vector<int>& ids);

}  // namespace anisoft::acceptance
