#include "laborcast/run_config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "laborcast/errors.hpp"

namespace laborcast {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return std::string(s.substr(first, last - first + 1));
}

double to_double(const std::string& key, const std::string& value) {
  // strtod accepts the exponent forms from_chars-only parsing would too;
  // reject trailing junk explicitly.
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (end != value.c_str() + value.size() || value.empty() || !std::isfinite(v))
    throw DataError("config key '" + key + "': bad numeric value '" + value + "'");
  return v;
}

int to_int(const std::string& key, const std::string& value) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    throw DataError("config key '" + key + "': bad integer '" + value + "'");
  return v;
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    throw DataError("config key '" + key + "': bad seed '" + value + "'");
  return v;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw DataError("config key '" + key + "': bad boolean '" + value + "'");
}

}  // namespace

ParsedRunConfig parse_run_config(std::string_view text) {
  ParsedRunConfig out;
  RunConfig& run = out.run;

  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"features", [&](const std::string&, const std::string& v) { out.features_path = v; }},
      {"target", [&](const std::string&, const std::string& v) { out.target_path = v; }},
      {"seed", [&](const std::string& k, const std::string& v) { run.seed = to_u64(k, v); }},
      {"split_fraction",
       [&](const std::string& k, const std::string& v) { run.split_fraction = to_double(k, v); }},
      {"top_k", [&](const std::string& k, const std::string& v) { run.top_k = to_int(k, v); }},
      {"horizon", [&](const std::string& k, const std::string& v) { run.horizon = to_int(k, v); }},
      {"select_on_train_only",
       [&](const std::string& k, const std::string& v) { run.select_on_train_only = to_bool(k, v); }},
      {"use_all_features",
       [&](const std::string& k, const std::string& v) { run.use_all_features = to_bool(k, v); }},
      {"sgd.epochs", [&](const std::string& k, const std::string& v) { run.sgd.epochs = to_int(k, v); }},
      {"sgd.initial_step",
       [&](const std::string& k, const std::string& v) { run.sgd.initial_step = to_double(k, v); }},
      {"sgd.decay", [&](const std::string& k, const std::string& v) { run.sgd.decay = to_double(k, v); }},
      {"sgd.l2_penalty",
       [&](const std::string& k, const std::string& v) { run.sgd.l2_penalty = to_double(k, v); }},
      {"forest.n_trees",
       [&](const std::string& k, const std::string& v) { run.forest.n_trees = to_int(k, v); }},
      {"forest.max_depth",
       [&](const std::string& k, const std::string& v) { run.forest.max_depth = to_int(k, v); }},
      {"forest.min_samples_leaf",
       [&](const std::string& k, const std::string& v) { run.forest.min_samples_leaf = to_int(k, v); }},
      {"forest.features_per_split",
       [&](const std::string& k, const std::string& v) { run.forest.features_per_split = to_int(k, v); }},
      {"forest.bootstrap",
       [&](const std::string& k, const std::string& v) { run.forest.bootstrap = to_bool(k, v); }},
      {"gbt.rounds", [&](const std::string& k, const std::string& v) { run.gbt.rounds = to_int(k, v); }},
      {"gbt.learning_rate",
       [&](const std::string& k, const std::string& v) { run.gbt.learning_rate = to_double(k, v); }},
      {"gbt.max_depth",
       [&](const std::string& k, const std::string& v) { run.gbt.max_depth = to_int(k, v); }},
      {"gbt.l2_leaf",
       [&](const std::string& k, const std::string& v) { run.gbt.l2_leaf = to_double(k, v); }},
      {"gbt.min_split_gain",
       [&](const std::string& k, const std::string& v) { run.gbt.min_split_gain = to_double(k, v); }},
      {"oblivious.rounds",
       [&](const std::string& k, const std::string& v) { run.oblivious.rounds = to_int(k, v); }},
      {"oblivious.learning_rate",
       [&](const std::string& k, const std::string& v) { run.oblivious.learning_rate = to_double(k, v); }},
      {"oblivious.max_depth",
       [&](const std::string& k, const std::string& v) { run.oblivious.max_depth = to_int(k, v); }},
      {"oblivious.l2_leaf",
       [&](const std::string& k, const std::string& v) { run.oblivious.l2_leaf = to_double(k, v); }},
      {"oblivious.min_split_gain",
       [&](const std::string& k, const std::string& v) { run.oblivious.min_split_gain = to_double(k, v); }},
      {"svr.c_penalty",
       [&](const std::string& k, const std::string& v) { run.svr.c_penalty = to_double(k, v); }},
      {"svr.epsilon_tube",
       [&](const std::string& k, const std::string& v) { run.svr.epsilon_tube = to_double(k, v); }},
      {"svr.gamma", [&](const std::string& k, const std::string& v) { run.svr.gamma = to_double(k, v); }},
      {"svr.kkt_tolerance",
       [&](const std::string& k, const std::string& v) { run.svr.kkt_tolerance = to_double(k, v); }},
      {"svr.max_passes",
       [&](const std::string& k, const std::string& v) { run.svr.max_passes = to_int(k, v); }},
      {"lstm.window", [&](const std::string& k, const std::string& v) { run.lstm.window = to_int(k, v); }},
      {"lstm.hidden", [&](const std::string& k, const std::string& v) { run.lstm.hidden = to_int(k, v); }},
      {"lstm.epochs", [&](const std::string& k, const std::string& v) { run.lstm.epochs = to_int(k, v); }},
      {"lstm.step_size",
       [&](const std::string& k, const std::string& v) { run.lstm.step_size = to_double(k, v); }},
      {"lstm.clip_norm",
       [&](const std::string& k, const std::string& v) { run.lstm.clip_norm = to_double(k, v); }},
  };

  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw DataError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end())
      throw DataError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    it->second(key, value);
  }
  return out;
}

std::string serialize_run_config(const ParsedRunConfig& cfg) {
  std::ostringstream out;
  out.precision(17);
  const RunConfig& r = cfg.run;
  if (cfg.features_path) out << "features = " << *cfg.features_path << '\n';
  if (cfg.target_path) out << "target = " << *cfg.target_path << '\n';
  out << "seed = " << r.seed << '\n'
      << "split_fraction = " << r.split_fraction << '\n'
      << "top_k = " << r.top_k << '\n'
      << "horizon = " << r.horizon << '\n'
      << "select_on_train_only = " << (r.select_on_train_only ? "true" : "false") << '\n'
      << "use_all_features = " << (r.use_all_features ? "true" : "false") << '\n'
      << "sgd.epochs = " << r.sgd.epochs << '\n'
      << "sgd.initial_step = " << r.sgd.initial_step << '\n'
      << "sgd.decay = " << r.sgd.decay << '\n'
      << "sgd.l2_penalty = " << r.sgd.l2_penalty << '\n'
      << "forest.n_trees = " << r.forest.n_trees << '\n'
      << "forest.max_depth = " << r.forest.max_depth << '\n'
      << "forest.min_samples_leaf = " << r.forest.min_samples_leaf << '\n'
      << "forest.features_per_split = " << r.forest.features_per_split << '\n'
      << "forest.bootstrap = " << (r.forest.bootstrap ? "true" : "false") << '\n'
      << "gbt.rounds = " << r.gbt.rounds << '\n'
      << "gbt.learning_rate = " << r.gbt.learning_rate << '\n'
      << "gbt.max_depth = " << r.gbt.max_depth << '\n'
      << "gbt.l2_leaf = " << r.gbt.l2_leaf << '\n'
      << "gbt.min_split_gain = " << r.gbt.min_split_gain << '\n'
      << "oblivious.rounds = " << r.oblivious.rounds << '\n'
      << "oblivious.learning_rate = " << r.oblivious.learning_rate << '\n'
      << "oblivious.max_depth = " << r.oblivious.max_depth << '\n'
      << "oblivious.l2_leaf = " << r.oblivious.l2_leaf << '\n'
      << "oblivious.min_split_gain = " << r.oblivious.min_split_gain << '\n'
      << "svr.c_penalty = " << r.svr.c_penalty << '\n'
      << "svr.epsilon_tube = " << r.svr.epsilon_tube << '\n'
      << "svr.gamma = " << r.svr.gamma << '\n'
      << "svr.kkt_tolerance = " << r.svr.kkt_tolerance << '\n'
      << "svr.max_passes = " << r.svr.max_passes << '\n'
      << "lstm.window = " << r.lstm.window << '\n'
      << "lstm.hidden = " << r.lstm.hidden << '\n'
      << "lstm.epochs = " << r.lstm.epochs << '\n'
      << "lstm.step_size = " << r.lstm.step_size << '\n'
      << "lstm.clip_norm = " << r.lstm.clip_norm << '\n';
  return out.str();
}

}  // namespace laborcast
