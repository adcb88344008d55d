#pragma once

// Tweet normalization: lowercase, strip Unicode punctuation (general category P*)
// except a leading '@' or '#', split on whitespace.

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "advbot/common/diagnostics.hpp"
#include "advbot/common/error.hpp"
#include "advbot/corpus/types.hpp"

namespace advbot::corpus {

class EmptySequenceError : public DataError {
 public:
  using DataError::DataError;
};

enum class VocabMode { build, lookup };

namespace detail {

inline void append_utf8(std::string& out, UChar32 c) {
  char buf[U8_MAX_LENGTH];
  int32_t len = 0;
  U8_APPEND_UNSAFE(buf, len, c);
  out.append(buf, static_cast<std::size_t>(len));
}

}  // namespace detail

// Normalized tokens of `text`, no truncation.
inline std::vector<std::string> split_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty() && current != "@" && current != "#") tokens.push_back(current);
    current.clear();
  };
  const auto* s = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c;
    U8_NEXT(s, i, length, c);
    if (c < 0) continue;  // invalid byte sequence
    if (u_isUWhiteSpace(c)) {
      flush();
      continue;
    }
    if (u_ispunct(c)) {
      if ((c == '@' || c == '#') && current.empty()) current.push_back(static_cast<char>(c));
      continue;
    }
    detail::append_utf8(current, u_tolower(c));
  }
  flush();
  return tokens;
}

inline std::string detokenize(const TokenSeq& seq, const Vocab& vocab) {
  std::string out;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i) out += ' ';
    out += vocab.token(seq[i]);
  }
  return out;
}

inline TokenSeq tokenize(std::string_view text, const Vocab& vocab,
                         std::size_t max_len = kDefaultMaxLen) {
  auto tokens = split_tokens(text);
  if (tokens.empty()) throw EmptySequenceError("empty sequence after tokenization");
  TokenSeq seq;
  const std::size_t n = std::min(tokens.size(), max_len);
  seq.ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) seq.ids.push_back(vocab.id(tokens[i]));
  return seq;
}

// Build mode appends unseen tokens to `vocab` before mapping.
inline TokenSeq tokenize(std::string_view text, VocabMode mode, Vocab& vocab,
                         std::size_t max_len = kDefaultMaxLen) {
  if (mode == VocabMode::build) {
    for (const auto& t : split_tokens(text)) {
      if (t != vocab.token(kPad) && t != vocab.token(kBos) && t != vocab.token(kEos) &&
          t != vocab.token(kUnk)) {
        vocab.add(t);
      }
    }
  }
  return tokenize(text, static_cast<const Vocab&>(vocab), max_len);
}

// Frequency-ranked vocabulary: count >= min_count, most frequent first, ties
// lexicographic, at most max_size ids including the four reserved ones.
inline Vocab build_vocab(const std::vector<std::string>& corpus, std::size_t min_count,
                         std::size_t max_size, Diagnostics* diag = nullptr) {
  if (corpus.empty()) throw std::invalid_argument("build_vocab: corpus is empty");
  if (max_size < kNumReserved) throw std::invalid_argument("build_vocab: max_size < 4");
  const Vocab reserved;
  std::map<std::string, std::size_t> counts;
  for (const auto& text : corpus) {
    for (auto& t : split_tokens(text)) {
      if (!reserved.contains(t)) ++counts[t];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [tok, n] : counts) {
    if (n >= min_count) kept.emplace_back(tok, n);
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (kept.size() > max_size - kNumReserved) kept.resize(max_size - kNumReserved);
  if (kept.empty()) warn(diag, "build_vocab: every token was filtered; vocab holds reserved tokens only");
  Vocab vocab;
  for (auto& [tok, n] : kept) vocab.add(tok);
  return vocab;
}

}  // namespace advbot::corpus
