#include "rdceg/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rdceg/error.hpp"

namespace rdceg {

using nlohmann::json;

auto terminal_name(Terminal t) -> std::string {
  switch (t) {
    case Terminal::Critical: return "critical";
    case Terminal::DroppedOut: return "dropped_out";
    case Terminal::Censored: return "censored";
  }
  return "censored";
}

auto parse_terminal(const std::string& s) -> Terminal {
  if (s == "critical") return Terminal::Critical;
  if (s == "dropped_out") return Terminal::DroppedOut;
  if (s == "censored") return Terminal::Censored;
  throw DataError{"unknown terminal status '" + s + "'"};
}

namespace {

auto header_json(const Provenance& h) -> json {
  return json{{"seed", h.seed}, {"model", h.model}, {"n", h.n}, {"generated_at", h.generated_at}};
}

auto observation_json(const PathObservation& obs) -> json {
  auto steps = json::array();
  for (const auto& s : obs.steps) {
    auto j = json{{"label", s.label}};
    if (s.hold) j["hold"] = *s.hold;
    if (s.censored) j["censored"] = true;
    steps.push_back(std::move(j));
  }
  auto j = json{{"id", obs.id}};
  if (!obs.entry.empty()) j["entry"] = obs.entry;
  j["steps"] = std::move(steps);
  j["terminal"] = terminal_name(obs.terminal);
  return j;
}

auto parse_observation(const json& j, long line) -> PathObservation {
  auto obs = PathObservation{.line = line};
  if (!j.is_object() || !j.contains("id") || !j.contains("steps") || !j.contains("terminal")) {
    throw DataError{"record needs id, steps and terminal", line};
  }
  obs.id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
  if (j.contains("entry") && !j["entry"].is_null()) obs.entry = j["entry"].get<std::string>();
  for (const auto& s : j["steps"]) {
    auto step = Step{.label = s.at("label").get<std::string>()};
    if (s.contains("hold") && !s["hold"].is_null()) {
      if (!s["hold"].is_number()) throw DataError{"hold must be a number", line};
      step.hold = s["hold"].get<double>();
    }
    step.censored = s.value("censored", false);
    obs.steps.push_back(std::move(step));
  }
  obs.terminal = parse_terminal(j["terminal"].get<std::string>());
  return obs;
}

auto format_double(double x) -> std::string {
  // Shortest round-trip representation, shared with the JSON writer.
  return json(x).dump();
}

auto split(const std::string& s, char sep) -> std::vector<std::string> {
  auto parts = std::vector<std::string>{};
  auto start = 0u;
  while (true) {
    auto pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = static_cast<unsigned>(pos) + 1;
  }
  return parts;
}

auto parse_number(const std::string& s, long line) -> double {
  auto value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw DataError{"bad number '" + s + "'", line};
  return value;
}

void write_csv(std::ostream& out, const Dataset& data) {
  out << "# seed=" << data.header.seed << "\n# model=" << data.header.model << "\n# n=" << data.header.n
      << "\n# generated_at=" << data.header.generated_at << "\n";
  out << "id,step_index,label,hold,terminal\n";
  for (const auto& obs : data.individuals) {
    if (!obs.entry.empty()) throw ValidationError{"CSV cannot carry a non-root entry (individual " + obs.id + ")"};
    if (obs.id.find(',') != std::string::npos) throw ValidationError{"CSV ids cannot contain commas"};
    auto term = terminal_name(obs.terminal);
    if (obs.steps.empty()) {
      out << obs.id << ",0,,," << term << "\n";
      continue;
    }
    for (auto k = 0u; k < obs.steps.size(); ++k) {
      const auto& s = obs.steps[k];
      out << obs.id << "," << k << "," << s.label << ",";
      if (s.hold) out << format_double(*s.hold) << (s.censored ? "+" : "");
      out << "," << term << "\n";
    }
  }
}

auto read_csv(std::istream& in) -> Dataset {
  auto data = Dataset{};
  auto line_text = std::string{};
  auto line = 0L;
  auto saw_header = false;
  while (std::getline(in, line_text)) {
    ++line;
    if (!line_text.empty() && line_text.back() == '\r') line_text.pop_back();
    if (line_text.empty()) continue;
    if (line_text[0] == '#') {
      auto eq = line_text.find('=');
      if (eq == std::string::npos) continue;
      auto key = line_text.substr(1, eq - 1);
      key.erase(0, key.find_first_not_of(' '));
      auto value = line_text.substr(eq + 1);
      if (key == "seed") data.header.seed = std::stoull(value);
      if (key == "model") data.header.model = value;
      if (key == "n") data.header.n = std::stoll(value);
      if (key == "generated_at") data.header.generated_at = value;
      continue;
    }
    if (!saw_header) {
      if (line_text != "id,step_index,label,hold,terminal") {
        throw DataError{"expected header id,step_index,label,hold,terminal", line};
      }
      saw_header = true;
      continue;
    }
    auto cols = split(line_text, ',');
    if (cols.size() != 5) throw DataError{"expected 5 columns", line};
    auto index = static_cast<long>(parse_number(cols[1], line));
    auto terminal = parse_terminal(cols[4]);
    auto fresh = data.individuals.empty() || data.individuals.back().id != cols[0];
    if (fresh) {
      if (index != 0) throw DataError{"first row of individual " + cols[0] + " must have step_index 0", line};
      data.individuals.push_back(PathObservation{.id = cols[0], .terminal = terminal, .line = line});
    }
    auto& obs = data.individuals.back();
    if (obs.terminal != terminal) throw DataError{"terminal status changes within individual " + obs.id, line};
    if (cols[2].empty()) {
      if (!fresh) throw DataError{"empty label", line};
      continue;
    }
    if (index != static_cast<long>(obs.steps.size())) throw DataError{"step_index out of sequence", line};
    auto step = Step{.label = cols[2]};
    if (!cols[3].empty()) {
      auto text = cols[3];
      if (text.back() == '+') {
        step.censored = true;
        text.pop_back();
      }
      step.hold = parse_number(text, line);
    }
    obs.steps.push_back(std::move(step));
  }
  return data;
}

void write_jsonl(std::ostream& out, const Dataset& data) {
  out << json{{"header", header_json(data.header)}}.dump() << "\n";
  for (const auto& obs : data.individuals) out << observation_json(obs).dump() << "\n";
}

auto read_jsonl(std::istream& in) -> Dataset {
  auto data = Dataset{};
  auto text = std::string{};
  auto line = 0L;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto j = json{};
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      throw DataError{std::string{"malformed JSON: "} + e.what(), line};
    }
    try {
      if (j.contains("header")) {
        const auto& h = j["header"];
        data.header.seed = h.value("seed", std::uint64_t{0});
        data.header.model = h.value("model", std::string{});
        data.header.n = h.value("n", std::int64_t{0});
        data.header.generated_at = h.value("generated_at", std::string{});
        continue;
      }
      data.individuals.push_back(parse_observation(j, line));
    } catch (const json::exception& e) {
      throw DataError{std::string{"bad record: "} + e.what(), line};
    }
  }
  return data;
}

}  // namespace

void write_dataset(std::ostream& out, const Dataset& data, DataFormat format) {
  if (format == DataFormat::Csv) {
    write_csv(out, data);
  } else {
    write_jsonl(out, data);
  }
}

auto read_dataset(std::istream& in, DataFormat format) -> Dataset {
  return format == DataFormat::Csv ? read_csv(in) : read_jsonl(in);
}

auto format_for_path(const std::string& path) -> DataFormat {
  auto lower = path;
  std::ranges::transform(lower, lower.begin(), [](unsigned char c) { return std::tolower(c); });
  return lower.ends_with(".csv") ? DataFormat::Csv : DataFormat::Jsonl;
}

void save_dataset(const std::string& path, const Dataset& data, std::optional<DataFormat> format) {
  auto out = std::ofstream{path, std::ios::binary};
  if (!out) throw Error{"cannot write '" + path + "'"};
  write_dataset(out, data, format.value_or(format_for_path(path)));
}

auto load_dataset(const std::string& path, std::optional<DataFormat> format) -> Dataset {
  auto in = std::ifstream{path, std::ios::binary};
  if (!in) throw ValidationError{"cannot read '" + path + "'"};
  return read_dataset(in, format.value_or(format_for_path(path)));
}

auto SufficientStats::empty(const EventTree& tree) -> SufficientStats {
  auto s = SufficientStats{};
  s.counts.resize(tree.num_vertices());
  for (auto v = 0; v < tree.num_vertices(); ++v) s.counts[v].assign(tree.out_edges(v).size(), 0);
  s.holds.resize(tree.num_edges());
  s.censored.resize(tree.num_edges());
  return s;
}

auto SufficientStats::operator+=(const SufficientStats& other) -> SufficientStats& {
  if (counts.size() != other.counts.size() || holds.size() != other.holds.size()) {
    throw DataError{"cannot add statistics over different trees"};
  }
  for (auto v = 0u; v < counts.size(); ++v) {
    for (auto i = 0u; i < counts[v].size(); ++i) counts[v][i] += other.counts[v][i];
  }
  for (auto e = 0u; e < holds.size(); ++e) {
    holds[e].insert(holds[e].end(), other.holds[e].begin(), other.holds[e].end());
    censored[e].insert(censored[e].end(), other.censored[e].begin(), other.censored[e].end());
  }
  return *this;
}

auto SufficientStats::total_transitions() const -> std::int64_t {
  auto total = std::int64_t{0};
  for (const auto& c : counts) {
    for (auto x : c) total += x;
  }
  return total;
}

auto sufficient_stats(const Dataset& data, const ModifiedTree& modified) -> SufficientStats {
  const auto& tree = modified.tree;
  auto stats = SufficientStats::empty(tree);
  for (const auto& obs : data.individuals) {
    auto fail = [&](const std::string& what) -> DataError {
      return DataError{"individual " + obs.id + ": " + what, obs.line};
    };
    auto v = tree.root();
    if (!obs.entry.empty()) {
      auto entry = tree.find_vertex(obs.entry);
      if (!entry || !tree.is_situation(*entry)) throw fail("entry '" + obs.entry + "' is not a situation");
      v = *entry;
    }
    for (auto k = 0u; k < obs.steps.size(); ++k) {
      const auto& step = obs.steps[k];
      if (v == k_none) throw fail("step after reaching a terminal leaf");
      auto e = tree.child_edge(v, step.label);
      if (!e) throw fail("label '" + step.label + "' does not leave situation '" + tree.name(v) + "'");
      const auto& edge = tree.edge(*e);
      if (edge.timed != step.hold.has_value()) {
        throw fail(edge.timed ? "timed edge '" + tree.edge_key(*e) + "' needs a holding time"
                              : "untimed edge '" + tree.edge_key(*e) + "' carries a holding time");
      }
      if (step.hold && !(*step.hold >= 0.0)) throw fail("negative holding time");
      if (step.censored) {
        if (!edge.timed) throw fail("censored step on an untimed edge");
        if (k + 1 != obs.steps.size()) throw fail("censored step must be the last one");
        stats.censored[*e].push_back(*step.hold);
        v = k_none;
        break;
      }
      auto idx = *e - tree.out_edges(v).front();
      ++stats.counts[v][idx];
      if (step.hold) stats.holds[*e].push_back(*step.hold);
      v = tree.resolved_child(*e);
      if (v == k_none && k + 1 != obs.steps.size()) throw fail("step after reaching a terminal leaf");
    }
    auto ended_in_leaf = !obs.steps.empty() && !obs.steps.back().censored && v == k_none;
    if (ended_in_leaf != (obs.terminal == Terminal::Critical)) {
      throw fail(ended_in_leaf ? "path reaches a critical leaf but is not marked critical"
                               : "marked critical but the path does not reach a critical leaf");
    }
  }
  return stats;
}

auto median_hold(const SufficientStats& stats) -> std::optional<double> {
  auto all = std::vector<double>{};
  for (const auto& h : stats.holds) all.insert(all.end(), h.begin(), h.end());
  if (all.empty()) return std::nullopt;
  auto mid = all.begin() + static_cast<long>(all.size() / 2);
  std::nth_element(all.begin(), mid, all.end());
  if (all.size() % 2 == 1) return *mid;
  auto lower = *std::max_element(all.begin(), mid);
  return 0.5 * (lower + *mid);
}

}  // namespace rdceg
