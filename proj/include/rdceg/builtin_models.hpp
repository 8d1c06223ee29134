#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "rdceg/simulate.hpp"

namespace rdceg {

// Shipped generators.  The structures are fixed; every numeric parameter is a synthetic default.
//   falls          referral pathways for fall prevention, 17 positions plus the sink
//   epilepsy_like  age x EEG x treatment, first and second seizure, two passage-slices
//   smoking_a      cessation attempts, quitting depends on service use
//   smoking_b      cessation attempts, quitting independent of service use
auto builtin_names() -> std::vector<std::string>;
auto builtin_truth(std::string_view name) -> TruthSpec;  // throws ValidationError for unknown names
auto builtin_model(std::string_view name) -> GroundTruthModel;

}  // namespace rdceg
