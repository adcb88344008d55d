#pragma once

// Corpus file formats.
//
// JSONL: one object per line,
//   {"source": str, "target": str, "label": "human"|"bot", "domain": str, "provenance": str}
//
// CSV ingestion (Cresci-style tweets.csv, one file per domain): columns are looked
// up by header name through CsvColumns. A reply id that is empty, "0", "NULL",
// "null" or "NaN" means "not a reply".

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "advbot/common/csv.hpp"
#include "advbot/common/digest.hpp"
#include "advbot/common/error.hpp"
#include "advbot/corpus/conversations.hpp"
#include "advbot/corpus/manifest.hpp"
#include "advbot/corpus/types.hpp"

namespace advbot::corpus {

inline std::string to_jsonl_line(const TextExample& e) {
  nlohmann::ordered_json j;
  j["source"] = e.source;
  j["target"] = e.target;
  j["label"] = std::string(to_string(e.label));
  j["domain"] = e.domain.name();
  j["provenance"] = std::string(to_string(e.provenance));
  return j.dump();
}

inline std::string to_jsonl(const std::vector<TextExample>& examples) {
  std::string out;
  for (const auto& e : examples) {
    out += to_jsonl_line(e);
    out += '\n';
  }
  return out;
}

inline void write_jsonl(const std::string& path, const std::vector<TextExample>& examples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << to_jsonl(examples);
}

// Example ids are assigned from line order (first line id 0).
inline std::vector<TextExample> parse_jsonl(std::istream& in, const std::string& origin = "<stream>") {
  std::vector<TextExample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    try {
      const auto j = nlohmann::json::parse(line);
      TextExample e;
      e.id = out.size();
      e.source = j.at("source").get<std::string>();
      e.target = j.at("target").get<std::string>();
      e.label = parse_label(j.at("label").get<std::string>());
      e.domain = DomainTag::parse(j.at("domain").get<std::string>());
      e.provenance = j.contains("provenance") ? parse_provenance(j.at("provenance").get<std::string>())
                                              : Provenance::genuine;
      out.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw DataError(origin + ":" + std::to_string(lineno) + ": " + ex.what());
    } catch (const DataError& ex) {
      throw DataError(origin + ":" + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return out;
}

inline std::vector<TextExample> read_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus: " + path);
  return parse_jsonl(in, path);
}

struct CsvColumns {
  std::string tweet_id = "id";
  std::string text = "text";
  std::string reply_to = "in_reply_to_status_id";
  std::string user_id = "user_id";
};

struct IngestSource {
  DomainTag domain;
  std::string path;
};

struct IngestResult {
  std::vector<TextExample> examples;
  CorpusManifest manifest;
  std::size_t skipped_replies = 0;
};

namespace detail {

inline std::size_t column_index(const csv::Row& header, const std::string& name, const std::string& path) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw DataError(path + ": missing column '" + name + "'");
}

inline std::optional<std::int64_t> parse_reply(const std::string& s) {
  if (s.empty() || s == "0" || s == "NULL" || s == "null" || s == "NaN" || s == "nan") return std::nullopt;
  try {
    // Some exports write ids as floats ("1.2e+17"); accept exact integral values only.
    if (s.find_first_of(".eE") != std::string::npos) {
      const double v = csv::parse_double(s);
      return static_cast<std::int64_t>(v);
    }
    return csv::parse_int(s);
  } catch (const DataError&) {
    return std::nullopt;
  }
}

}  // namespace detail

inline std::vector<TweetRecord> read_tweet_csv(const std::string& path, const CsvColumns& cols, Label label) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open CSV: " + path);
  csv::Row header;
  if (!csv::read_row(in, header)) throw DataError(path + ": empty CSV");
  const auto id_col = detail::column_index(header, cols.tweet_id, path);
  const auto text_col = detail::column_index(header, cols.text, path);
  const auto reply_col = detail::column_index(header, cols.reply_to, path);
  std::vector<TweetRecord> out;
  csv::Row row;
  std::size_t line = 1;
  while (csv::read_row(in, row)) {
    ++line;
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() < header.size()) {
      throw DataError(path + ": record " + std::to_string(line) + " has " + std::to_string(row.size()) +
                      " fields, expected " + std::to_string(header.size()));
    }
    TweetRecord r;
    r.tweet_id = csv::parse_int(row[id_col]);
    r.text = row[text_col];
    r.reply_to = detail::parse_reply(row[reply_col]);
    r.author_class = label;
    out.push_back(std::move(r));
  }
  return out;
}

// Reads one CSV per domain, extracts reply pairs, and builds the manifest
// (tweets = data rows, conversations = extracted pairs, bot_combined derived).
inline IngestResult ingest_csv(const std::vector<IngestSource>& sources, const CsvColumns& cols) {
  IngestResult result;
  std::uint64_t next_id = 0;
  for (const auto& src : sources) {
    const Label label = src.domain.kind() == DomainTag::Kind::human ? Label::human : Label::bot;
    const auto records = read_tweet_csv(src.path, cols, label);
    auto extracted = extract_conversations(records);
    result.skipped_replies += extracted.skipped;
    auto& counts = result.manifest.domains[src.domain.name()];
    counts.tweets += static_cast<std::int64_t>(records.size());
    counts.conversations += static_cast<std::int64_t>(extracted.pairs.size());
    result.manifest.digests[std::filesystem::path(src.path).filename().string() + "@" + src.domain.name()] =
        sha256_file(src.path);
    for (auto& p : extracted.pairs) {
      TextExample e;
      e.id = next_id++;
      e.source = std::move(p.source);
      e.target = std::move(p.target);
      e.label = label;
      e.domain = src.domain;
      result.examples.push_back(std::move(e));
    }
  }
  result.manifest.recompute_combined();
  return result;
}

// Manifest of a JSONL corpus: every example counts as one conversation and two tweets.
inline CorpusManifest manifest_of(const std::vector<TextExample>& examples) {
  CorpusManifest m;
  for (const auto& e : examples) {
    auto& c = m.domains[e.domain.name()];
    c.tweets += 2;
    c.conversations += 1;
  }
  m.recompute_combined();
  return m;
}

}  // namespace advbot::corpus
