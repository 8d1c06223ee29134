#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "rdceg/ci_query.hpp"
#include "rdceg/diagnostics.hpp"
#include "rdceg/search.hpp"
#include "rdceg/simulate.hpp"
#include "rdceg/smp.hpp"

namespace rdceg {

using Json = nlohmann::json;

// Trees are nested objects: {"name", "children": [{"label", "timed", "slice_boundary",
// "child": {...}} or {"label", "timed", "repeat": "<situation>"}]}.  A child without a name is
// called "parent/label".
auto tree_to_json(const EventTree& tree) -> Json;
auto tree_from_json(const Json& j) -> EventTree;

auto search_config_to_json(const SearchConfig& config) -> Json;
auto search_config_from_json(const Json& j) -> SearchConfig;

// Ground-truth model file: tree, critical leaves, stage and cluster tables, dropout, search defaults.
auto truth_spec_to_json(const TruthSpec& spec) -> Json;
auto truth_spec_from_json(const Json& j) -> TruthSpec;

auto holding_law_to_json(const HoldingLaw& law) -> Json;
auto rdceg_to_json(const Rdceg& graph, const EventTree* tree = nullptr) -> Json;

// A fitted model round-trips: partitions, priors and posterior parameters are stored, positions
// and the RDCEG are rebuilt on reading.
auto fitted_to_json(const FittedModel& fit) -> Json;
auto fitted_from_json(const Json& j) -> FittedModel;

auto smp_to_json(const Smp& smp) -> Json;
auto first_passage_to_json(const Smp& smp, const FirstPassageResult& result) -> Json;

auto rolled_to_json(const RolledCeg& g) -> Json;
auto cut_report_to_json(const RolledCeg& g, const CutReport& report) -> Json;
auto statement_to_json(const CiStatement& s) -> Json;
auto intrinsic_to_json(const RolledCeg& g, const IntrinsicResult& result) -> Json;

auto error_report_to_json(const ErrorReport& report) -> Json;
auto loo_to_json(const LooReport& report) -> Json;

auto read_json_file(const std::string& path) -> Json;
void write_text_file(const std::string& path, const std::string& text);

}  // namespace rdceg
