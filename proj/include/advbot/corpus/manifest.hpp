#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "advbot/common/error.hpp"
#include "advbot/corpus/types.hpp"

namespace advbot::corpus {

struct DomainCounts {
  std::int64_t tweets = 0;
  std::int64_t conversations = 0;
  bool operator==(const DomainCounts&) const = default;
};

struct CorpusManifest {
  std::map<std::string, DomainCounts> domains;  // keyed by DomainTag::name()
  std::map<std::string, std::string> digests;   // source file -> sha256

  // Sets bot_combined to the sum of the three component bot domains present.
  void recompute_combined() {
    DomainCounts sum;
    bool any = false;
    for (const auto& d : component_bot_domains()) {
      auto it = domains.find(d.name());
      if (it == domains.end()) continue;
      sum.tweets += it->second.tweets;
      sum.conversations += it->second.conversations;
      any = true;
    }
    if (any) domains["bot_combined"] = sum;
  }

  // Nonnegative counts; bot_combined (if present) equals the sum of its parts.
  std::vector<std::string> invariant_violations() const {
    std::vector<std::string> out;
    for (const auto& [name, c] : domains) {
      if (c.tweets < 0 || c.conversations < 0) out.push_back("negative count for " + name);
    }
    auto it = domains.find("bot_combined");
    if (it != domains.end()) {
      DomainCounts sum;
      bool any = false;
      for (const auto& d : component_bot_domains()) {
        auto p = domains.find(d.name());
        if (p == domains.end()) continue;
        any = true;
        sum.tweets += p->second.tweets;
        sum.conversations += p->second.conversations;
      }
      if (any && !(sum == it->second)) out.push_back("bot_combined differs from the sum of bot domains");
    }
    return out;
  }
};

// Published per-domain top-level counts of the Cresci-2017 conversation data.
inline CorpusManifest cresci2017_expected_manifest() {
  CorpusManifest m;
  m.domains["human"] = {39264, 16967};
  m.domains["bot_political"] = {3810, 1778};
  m.domains["bot_financial"] = {932, 434};
  m.domains["bot_commercial"] = {430, 200};
  m.domains["bot_combined"] = {5172, 2412};
  return m;
}

struct ValidationEntry {
  std::string domain;
  std::optional<DomainCounts> expected;
  std::optional<DomainCounts> actual;
  std::int64_t tweet_delta = 0;         // actual - expected
  std::int64_t conversation_delta = 0;  // actual - expected
  bool pass = false;
};

struct ValidationReport {
  std::vector<ValidationEntry> entries;
  bool pass = false;
};

inline ValidationReport validate_manifest(const CorpusManifest& manifest, const CorpusManifest& expected) {
  ValidationReport report;
  report.pass = true;
  std::map<std::string, bool> names;
  for (const auto& [n, c] : expected.domains) names[n] = true;
  for (const auto& [n, c] : manifest.domains) names[n] = true;
  for (const auto& [name, unused] : names) {
    ValidationEntry e;
    e.domain = name;
    if (auto it = expected.domains.find(name); it != expected.domains.end()) e.expected = it->second;
    if (auto it = manifest.domains.find(name); it != manifest.domains.end()) e.actual = it->second;
    if (e.expected && e.actual) {
      e.tweet_delta = e.actual->tweets - e.expected->tweets;
      e.conversation_delta = e.actual->conversations - e.expected->conversations;
      e.pass = e.tweet_delta == 0 && e.conversation_delta == 0;
    }
    report.pass = report.pass && e.pass;
    report.entries.push_back(e);
  }
  return report;
}

inline nlohmann::ordered_json to_json(const CorpusManifest& m) {
  nlohmann::ordered_json j;
  j["domains"] = nlohmann::ordered_json::object();
  for (const auto& [name, c] : m.domains) {
    j["domains"][name] = {{"tweets", c.tweets}, {"conversations", c.conversations}};
  }
  j["digests"] = nlohmann::ordered_json::object();
  for (const auto& [file, d] : m.digests) j["digests"][file] = d;
  return j;
}

inline CorpusManifest manifest_from_json(const nlohmann::json& j) {
  CorpusManifest m;
  try {
    for (const auto& [name, c] : j.at("domains").items()) {
      m.domains[name] = {c.at("tweets").get<std::int64_t>(), c.at("conversations").get<std::int64_t>()};
    }
    if (j.contains("digests")) {
      for (const auto& [file, d] : j.at("digests").items()) m.digests[file] = d.get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

inline nlohmann::ordered_json to_json(const ValidationReport& r) {
  nlohmann::ordered_json j;
  j["pass"] = r.pass;
  j["entries"] = nlohmann::ordered_json::array();
  for (const auto& e : r.entries) {
    nlohmann::ordered_json row;
    row["domain"] = e.domain;
    row["pass"] = e.pass;
    if (e.expected) row["expected"] = {{"tweets", e.expected->tweets}, {"conversations", e.expected->conversations}};
    else row["expected"] = nullptr;
    if (e.actual) row["actual"] = {{"tweets", e.actual->tweets}, {"conversations", e.actual->conversations}};
    else row["actual"] = nullptr;
    row["tweet_delta"] = e.tweet_delta;
    row["conversation_delta"] = e.conversation_delta;
    j["entries"].push_back(row);
  }
  return j;
}

}  // namespace advbot::corpus
