#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rdceg/event_tree.hpp"

namespace rdceg {

enum class Terminal { Critical, DroppedOut, Censored };

auto terminal_name(Terminal t) -> std::string;
auto parse_terminal(const std::string& s) -> Terminal;

struct Step {
  std::string label;
  std::optional<double> hold;  // present iff the edge is timed
  bool censored = false;       // hold is a lower bound (observation ended first); last step only

  friend auto operator==(const Step&, const Step&) -> bool = default;
};

struct PathObservation {
  std::string id;
  std::string entry;  // starting situation; empty means the root
  std::vector<Step> steps;
  Terminal terminal = Terminal::Censored;
  long line = 0;  // source line when read from a file

  friend auto operator==(const PathObservation& a, const PathObservation& b) -> bool {
    return a.id == b.id && a.entry == b.entry && a.steps == b.steps && a.terminal == b.terminal;
  }
};

struct Provenance {
  std::uint64_t seed = 0;
  std::string model;
  std::int64_t n = 0;
  std::string generated_at;

  friend auto operator==(const Provenance&, const Provenance&) -> bool = default;
};

struct Dataset {
  Provenance header;
  std::vector<PathObservation> individuals;

  friend auto operator==(const Dataset&, const Dataset&) -> bool = default;
};

enum class DataFormat { Jsonl, Csv };

// JSONL: a {"header": {...}} line, then one {id, entry, steps: [{label, hold, censored}], terminal}
// object per line.  CSV: '#' provenance comments, then id,step_index,label,hold,terminal rows;
// a censored hold carries a trailing '+', an individual without steps has one row with an empty label.
void write_dataset(std::ostream& out, const Dataset& data, DataFormat format);
auto read_dataset(std::istream& in, DataFormat format) -> Dataset;
auto format_for_path(const std::string& path) -> DataFormat;
void save_dataset(const std::string& path, const Dataset& data, std::optional<DataFormat> format = {});
auto load_dataset(const std::string& path, std::optional<DataFormat> format = {}) -> Dataset;

// The counts N and holding-time lists H entering the likelihood.
struct SufficientStats {
  std::vector<std::vector<std::int64_t>> counts;  // per vertex, aligned with out_edges()
  std::vector<std::vector<double>> holds;         // per edge
  std::vector<std::vector<double>> censored;      // per edge: right-censored holds

  static auto empty(const EventTree& tree) -> SufficientStats;
  auto operator+=(const SufficientStats& other) -> SufficientStats&;
  auto total_transitions() const -> std::int64_t;
  friend auto operator==(const SufficientStats&, const SufficientStats&) -> bool = default;
};

// Replays every observation on the tree.  Throws DataError naming the individual and source line.
auto sufficient_stats(const Dataset& data, const ModifiedTree& tree) -> SufficientStats;

// All uncensored holding times, for the default phantom holding time.
auto median_hold(const SufficientStats& stats) -> std::optional<double>;

}  // namespace rdceg
