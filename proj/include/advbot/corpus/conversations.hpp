#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "advbot/common/diagnostics.hpp"
#include "advbot/corpus/tokenize.hpp"
#include "advbot/corpus/types.hpp"

namespace advbot::corpus {

struct TweetRecord {
  std::int64_t tweet_id = 0;
  std::string text;
  std::optional<std::int64_t> reply_to;
  Label author_class = Label::human;
};

struct TextPair {
  std::int64_t source_id = 0;
  std::int64_t target_id = 0;
  std::string source;
  std::string target;
};

struct ExtractionResult {
  std::vector<TextPair> pairs;  // ordered by target tweet id
  std::size_t skipped = 0;      // dangling, self or duplicate references
};

// Pairs every reply with the tweet it answers.
inline ExtractionResult extract_conversations(const std::vector<TweetRecord>& records) {
  std::unordered_map<std::int64_t, std::size_t> by_id;
  by_id.reserve(records.size());
  ExtractionResult out;
  std::vector<bool> duplicate(records.size(), false);
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!by_id.emplace(records[i].tweet_id, i).second) duplicate[i] = true;
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (!r.reply_to) continue;
    if (duplicate[i] || *r.reply_to == r.tweet_id) {
      ++out.skipped;
      continue;
    }
    auto it = by_id.find(*r.reply_to);
    if (it == by_id.end()) {
      ++out.skipped;
      continue;
    }
    const auto& src = records[it->second];
    out.pairs.push_back({src.tweet_id, r.tweet_id, src.text, r.text});
  }
  std::stable_sort(out.pairs.begin(), out.pairs.end(),
                   [](const TextPair& a, const TextPair& b) { return a.target_id < b.target_id; });
  return out;
}

// Tokenizes text-level examples; examples that tokenize to nothing on either
// side are dropped (UNK-bearing ones are kept).
inline std::vector<LabeledExample> tokenize_examples(const std::vector<TextExample>& texts,
                                                     const Vocab& vocab,
                                                     std::size_t max_len = kDefaultMaxLen,
                                                     Diagnostics* diag = nullptr) {
  std::vector<LabeledExample> out;
  out.reserve(texts.size());
  std::size_t dropped = 0;
  for (const auto& t : texts) {
    try {
      LabeledExample e;
      e.id = t.id;
      e.pair.source = tokenize(t.source, vocab, max_len);
      e.pair.target = tokenize(t.target, vocab, max_len);
      e.pair.raw_source = t.source;
      e.pair.raw_target = t.target;
      e.label = t.label;
      e.provenance = t.provenance;
      e.domain = t.domain;
      out.push_back(std::move(e));
    } catch (const EmptySequenceError&) {
      ++dropped;
    }
  }
  if (dropped) warn(diag, "dropped " + std::to_string(dropped) + " examples empty after tokenization");
  return out;
}

inline std::vector<ConversationPair> pairs_of(const std::vector<LabeledExample>& examples) {
  std::vector<ConversationPair> out;
  out.reserve(examples.size());
  for (const auto& e : examples) out.push_back(e.pair);
  return out;
}

}  // namespace advbot::corpus
