#pragma once

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <array>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "advbot/common/csv.hpp"
#include "advbot/corpus/tokenize.hpp"
#include "advbot/corpus/types.hpp"

namespace advbot::analysis {

inline constexpr std::size_t kNumFeatures = 14;

inline const std::array<std::string_view, kNumFeatures>& feature_names() {
  static const std::array<std::string_view, kNumFeatures> names{
      "mention_count",     "hashtag_count",        "stopwords_count",     "word_count",
      "unique_word_count", "quoted_word_count",    "char_count",          "sentence_count",
      "capital_char_count", "capital_word_count",  "unique_to_total_ratio", "avg_sentence_length",
      "avg_word_length",   "stopword_to_total_ratio"};
  return names;
}

using FeatureVector = std::array<double, kNumFeatures>;

// Fixed 175-word English stopword list (lowercase).
inline const std::vector<std::string>& stopword_list() {
  static const std::vector<std::string> words{
      "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "you're", "you've", "you'll", "you'd",
      "your", "yours", "yourself", "yourselves", "he", "him", "his", "himself", "she", "she's", "her", "hers",
      "herself", "it", "it's", "its", "itself", "they", "them", "their", "theirs", "themselves", "what", "which",
      "who", "whom", "this", "that", "that'll", "these", "those", "am", "is", "are", "was", "were", "be", "been",
      "being", "have", "has", "had", "having", "do", "does", "did", "doing", "a", "an", "the", "and", "but", "if",
      "or", "because", "as", "until", "while", "of", "at", "by", "for", "with", "about", "against", "between",
      "into", "through", "during", "before", "after", "above", "below", "to", "from", "up", "down", "in", "out",
      "on", "off", "over", "under", "again", "further", "then", "once", "here", "there", "when", "where", "why",
      "how", "all", "any", "both", "each", "few", "more", "most", "other", "some", "such", "no", "nor", "not",
      "only", "own", "same", "so", "than", "too", "very", "s", "t", "can", "will", "just", "don", "don't",
      "should", "should've", "now", "d", "ll", "m", "o", "re", "ve", "y", "ain", "aren", "aren't", "couldn",
      "couldn't", "didn", "didn't", "doesn", "doesn't", "hadn", "hadn't", "hasn", "hasn't", "haven", "haven't",
      "isn", "isn't", "ma", "mustn", "mustn't", "needn", "needn't", "shouldn", "shouldn't", "wasn", "wasn't",
      "weren", "weren't", "won", "won't", "wouldn", "wouldn't"};
  return words;
}

inline bool is_stopword(const std::string& normalized) {
  static const std::unordered_set<std::string> set(stopword_list().begin(), stopword_list().end());
  return set.count(normalized) > 0;
}

namespace detail {

inline std::vector<UChar32> decode_utf8(std::string_view text) {
  std::vector<UChar32> out;
  const auto* s = reinterpret_cast<const uint8_t*>(text.data());
  const auto n = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < n) {
    UChar32 c;
    U8_NEXT(s, i, n, c);
    if (c >= 0) out.push_back(c);
  }
  return out;
}

inline bool is_double_quote(UChar32 c) { return c == '"' || c == 0x201C || c == 0x201D; }
inline bool is_sentence_end(UChar32 c) { return c == '.' || c == '!' || c == '?'; }

struct Word {
  std::size_t begin = 0;  // code-point offsets into the decoded text
  std::size_t end = 0;
};

}  // namespace detail

// Feature definitions:
//   word             whitespace-delimited token of the raw text
//   mention/hashtag  word starting with '@' / '#' followed by at least one more character
//   stopword         word that, lowercased with leading/trailing punctuation removed, is in stopword_list()
//   unique word      distinct lowercased, punctuation-trimmed words (a word that trims to nothing counts as itself)
//   quoted word      word with a character strictly inside a matched pair of double quotes; quotes pair up in
//                    order of appearance and a trailing unmatched quote is ignored
//   char_count       Unicode code points, whitespace included
//   sentence         maximal segment ending in '.', '!', '?' or end of text that holds a non-terminator character
//   capital word     word whose punctuation-trimmed form has >= 2 code points, at least one letter, and every
//                    letter uppercase
//   avg_word_length  mean code points per word
inline FeatureVector extract_features(std::string_view raw_text) {
  using namespace detail;
  const auto cps = decode_utf8(raw_text);
  FeatureVector f{};

  std::vector<Word> words;
  for (std::size_t i = 0; i < cps.size();) {
    if (u_isUWhiteSpace(cps[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < cps.size() && !u_isUWhiteSpace(cps[j])) ++j;
    words.push_back({i, j});
    i = j;
  }

  // Matched quote spans.
  std::vector<bool> quoted(cps.size(), false);
  std::size_t open = cps.size();
  for (std::size_t i = 0; i < cps.size(); ++i) {
    if (!is_double_quote(cps[i])) continue;
    if (open == cps.size()) {
      open = i;
    } else {
      for (std::size_t k = open + 1; k < i; ++k) quoted[k] = true;
      open = cps.size();
    }
  }

  double mentions = 0, hashtags = 0, stops = 0, quoted_words = 0, capital_words = 0, total_len = 0;
  std::set<std::string> unique;
  for (const auto& w : words) {
    const std::size_t len = w.end - w.begin;
    total_len += static_cast<double>(len);
    if (len >= 2 && cps[w.begin] == '@') ++mentions;
    if (len >= 2 && cps[w.begin] == '#') ++hashtags;

    std::size_t b = w.begin, e = w.end;
    while (b < e && u_ispunct(cps[b])) ++b;
    while (e > b && u_ispunct(cps[e - 1])) --e;
    std::string trimmed;
    for (std::size_t k = b; k < e; ++k) corpus::detail::append_utf8(trimmed, u_tolower(cps[k]));
    if (is_stopword(trimmed)) ++stops;
    if (trimmed.empty()) {
      for (std::size_t k = w.begin; k < w.end; ++k) corpus::detail::append_utf8(trimmed, cps[k]);
    }
    unique.insert(trimmed);

    bool any_quoted = false;
    for (std::size_t k = w.begin; k < w.end; ++k) {
      if (quoted[k] && !is_double_quote(cps[k])) any_quoted = true;
    }
    if (any_quoted) ++quoted_words;

    bool has_letter = false, all_upper = true;
    for (std::size_t k = b; k < e; ++k) {
      if (u_isalpha(cps[k])) {
        has_letter = true;
        if (!u_isupper(cps[k])) all_upper = false;
      }
    }
    if (e - b >= 2 && has_letter && all_upper) ++capital_words;
  }

  double sentences = 0, capital_chars = 0;
  bool content = false;
  for (UChar32 c : cps) {
    if (u_isupper(c)) ++capital_chars;
    if (is_sentence_end(c)) {
      if (content) ++sentences;
      content = false;
    } else if (!u_isUWhiteSpace(c)) {
      content = true;
    }
  }
  if (content) ++sentences;

  const double word_count = static_cast<double>(words.size());
  f[0] = mentions;
  f[1] = hashtags;
  f[2] = stops;
  f[3] = word_count;
  f[4] = static_cast<double>(unique.size());
  f[5] = quoted_words;
  f[6] = static_cast<double>(cps.size());
  f[7] = sentences;
  f[8] = capital_chars;
  f[9] = capital_words;
  f[10] = word_count > 0 ? f[4] / word_count : 0.0;
  f[11] = word_count / std::max(sentences, 1.0);
  f[12] = word_count > 0 ? total_len / word_count : 0.0;
  f[13] = word_count > 0 ? stops / word_count : 0.0;
  return f;
}

// Features of a conversation's response text.
inline FeatureVector features_of(const corpus::LabeledExample& e) { return extract_features(e.pair.raw_target); }

inline std::string features_csv(std::span<const corpus::LabeledExample> examples) {
  std::vector<csv::Row> rows;
  csv::Row header(feature_names().begin(), feature_names().end());
  header.push_back("label");
  header.push_back("domain");
  rows.push_back(std::move(header));
  for (const auto& e : examples) {
    const auto f = features_of(e);
    csv::Row r;
    for (double v : f) r.push_back(csv::format_double(v));
    r.emplace_back(corpus::to_string(e.label));
    r.push_back(e.domain.name());
    rows.push_back(std::move(r));
  }
  return csv::to_string(rows);
}

}  // namespace advbot::analysis
