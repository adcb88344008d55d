#pragma once

// Run configuration: an INI-style text file
//
//   # comment            (';' also starts a comment; only at line start)
//   [section]
//   key = value
//
// overridden by `section.key=value` pairs from the command line. Every key
// must appear in the schema below; unknown keys are rejected together.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "advbot/common/csv.hpp"
#include "advbot/common/error.hpp"

namespace advbot::cli {

struct KeySpec {
  std::string key;  // section.name
  std::string default_value;
  std::string help;
};

inline const std::vector<KeySpec>& config_schema() {
  static const std::vector<KeySpec> schema{
      {"run.seed", "1", "master seed; every component seed is derived from it"},
      {"run.threads", "1", "worker threads for scoring and rollouts (never changes outputs)"},

      {"paths.data", "", "corpus JSONL (synth output or ingested pairs)"},
      {"paths.generator", "", "generator checkpoint"},
      {"paths.detector", "", "detector checkpoint"},

      {"corpus.max_len", "32", "maximum tokens per message"},
      {"corpus.min_count", "1", "minimum token frequency for the vocabulary"},
      {"corpus.max_vocab", "20000", "vocabulary size cap, reserved tokens included"},
      {"corpus.test_fraction", "0.2", "stratified held-out fraction"},

      {"synth.pairs_per_style", "400", "pairs generated per style"},
      {"synth.styles", "human,bot_political,bot_financial,bot_commercial", "built-in styles to generate"},

      {"generator.embed_dim", "25", "embedding size"},
      {"generator.hidden_dim", "32", "LSTM hidden size"},
      {"generator.init_scale", "0.08", "uniform init half-width"},
      {"generator.train_domain", "bot_combined", "domain whose pairs pretrain the bot"},
      {"generator.epochs", "3", "MLE epochs"},
      {"generator.batch_size", "64", "MLE mini-batch size"},
      {"generator.optimizer", "adam", "adam or sgd_momentum"},
      {"generator.lr", "0.005", "MLE learning rate"},

      {"detector.embed_dim", "25", "embedding size"},
      {"detector.hidden_dim", "32", "LSTM hidden size"},
      {"detector.init_scale", "0.08", "uniform init half-width"},
      {"detector.steps", "20", "pretraining steps"},
      {"detector.batch_size", "64", "examples per step (half real, half fake)"},
      {"detector.optimizer", "adam", "adam or sgd_momentum"},
      {"detector.lr", "0.001", "learning rate"},

      {"game.iterations", "50", "outer iterations"},
      {"game.bd_steps", "1", "detector steps per iteration"},
      {"game.b_steps", "1", "bot steps per iteration"},
      {"game.n_roll", "16", "rollouts per position"},
      {"game.batch_size", "64", "sampled responses per step"},
      {"game.baseline_window", "64", "sequences in the running reward baseline"},
      {"game.detector_update_in_b_steps", "true", "also update the detector inside the bot loop"},
      {"game.teacher_forcing_steps", "0", "MLE steps on real pairs after each bot step"},
      {"game.bot_lr", "0.001", "bot learning rate"},
      {"game.detector_lr", "0.001", "detector learning rate"},
      {"game.temperature", "1", "sampling temperature"},
      {"game.metric_samples", "64", "held-out pairs for the cosine metric"},
      {"game.record_timing", "false", "fill bot_ms/detector_ms with wall-clock times"},
      {"game.cold_start", "false", "allow untrained models"},

      {"poison.mode", "pinched", "pinched or generated"},
      {"poison.fraction", "0.1", "attacks as a fraction of the bot class"},
      {"poison.rule", "lowest_detection_prob", "pinched selection: lowest_detection_prob or random"},
      {"poison.replace", "false", "replace genuine bot examples instead of augmenting"},
      {"poison.retrain", "false", "also train a detector on poisoned training data"},
      {"poison.bins", "20", "histogram bins"},
      {"poison.allow_untrained", "false", "allow generated attacks from a bot without adversarial training"},
      {"poison.train_steps", "200", "steps when a detector is trained here"},

      {"explain.method", "exact", "exact or sampled"},
      {"explain.permutations", "2000", "permutations for sampled Shapley"},
      {"explain.instances", "20", "bot test examples explained"},
      {"explain.l2", "0.001", "L2 penalty of the feature classifier"},

      {"crossdomain.trainer", "feature", "feature or detector"},
      {"crossdomain.domains", "bot_political,bot_financial,bot_commercial", "bot domains compared"},
      {"crossdomain.train_fraction", "0.8", "per-pool training fraction"},
      {"crossdomain.detector_steps", "200", "steps when the trainer is the detector"},

      {"validate.sources", "", "comma-separated domain=path CSV sources"},
      {"validate.expected", "cresci2017", "expected counts: cresci2017 or a manifest JSON path"},
      {"validate.id_column", "id", "tweet id column"},
      {"validate.text_column", "text", "tweet text column"},
      {"validate.reply_column", "in_reply_to_status_id", "replied-to tweet id column"},
  };
  return schema;
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

class Config {
 public:
  Config() {
    for (const auto& k : config_schema()) values_[k.key] = k.default_value;
  }

  // Parses INI text into section.key pairs (no schema check).
  static std::map<std::string, std::string> parse_text(std::string_view text, const std::string& origin) {
    std::map<std::string, std::string> out;
    std::string section;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const std::string t = trim(line);
      if (t.empty() || t[0] == '#' || t[0] == ';') continue;
      if (t.front() == '[') {
        if (t.back() != ']') throw ConfigError(origin + ":" + std::to_string(lineno) + ": malformed section header");
        section = trim(std::string_view(t).substr(1, t.size() - 2));
        continue;
      }
      const auto eq = t.find('=');
      if (eq == std::string::npos) throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
      // A key outside any section keeps its bare name (and fails the schema check by name).
      const std::string name = trim(std::string_view(t).substr(0, eq));
      out[section.empty() ? name : section + "." + name] = trim(std::string_view(t).substr(eq + 1));
    }
    return out;
  }

  // Applies assignments; every unknown key is reported in one error.
  void apply(const std::map<std::string, std::string>& kv) {
    std::vector<std::string> unknown;
    for (const auto& [k, v] : kv) {
      if (!values_.count(k)) unknown.push_back(k);
    }
    if (!unknown.empty()) {
      std::string msg = "unknown config key(s):";
      for (const auto& k : unknown) msg += " " + k;
      throw ConfigError(msg);
    }
    for (const auto& [k, v] : kv) values_[k] = v;
  }

  void load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    apply(parse_text(ss.str(), path));
  }

  // "section.key=value"
  void apply_override(std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) throw ConfigError("override '" + std::string(assignment) + "' lacks '='");
    apply({{trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1))}});
  }

  void set(const std::string& key, std::string value) { apply({{key, std::move(value)}}); }

  const std::string& str(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key: " + key);
    return it->second;
  }

  const std::string& required(const std::string& key) const {
    const auto& v = str(key);
    if (v.empty()) throw ConfigError("missing required config key: " + key);
    return v;
  }

  std::int64_t integer(const std::string& key) const {
    const auto& v = str(key);
    std::int64_t out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
      throw ConfigError(key + ": expected an integer, got '" + v + "'");
    }
    return out;
  }

  std::size_t count(const std::string& key) const {
    const auto v = integer(key);
    if (v < 0) throw ConfigError(key + ": must be non-negative");
    return static_cast<std::size_t>(v);
  }

  std::uint64_t u64(const std::string& key) const {
    const auto& v = str(key);
    std::uint64_t out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
      throw ConfigError(key + ": expected an unsigned integer, got '" + v + "'");
    }
    return out;
  }

  double real(const std::string& key) const {
    try {
      return csv::parse_double(str(key));
    } catch (const std::exception&) {
      throw ConfigError(key + ": expected a number, got '" + str(key) + "'");
    }
  }

  bool boolean(const std::string& key) const {
    std::string v = str(key);
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(key + ": expected a boolean, got '" + str(key) + "'");
  }

  std::vector<std::string> list(const std::string& key) const {
    std::vector<std::string> out;
    std::stringstream ss(str(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) out.push_back(item);
    }
    return out;
  }

  // Every key, grouped by section, in sorted order.
  std::string resolved_text() const {
    std::ostringstream os;
    std::string section;
    for (const auto& [k, v] : values_) {
      const auto dot = k.find('.');
      const std::string s = k.substr(0, dot);
      if (s != section) {
        if (!section.empty()) os << '\n';
        os << '[' << s << "]\n";
        section = s;
      }
      os << k.substr(dot + 1) << " =" << (v.empty() ? "" : " ") << v << '\n';
    }
    return os.str();
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace advbot::cli
