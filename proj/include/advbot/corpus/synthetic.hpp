#pragma once

// Seeded styled-corpus generator standing in for non-redistributable tweet data.
//
// Each word is drawn from one of five categories (mention, hashtag, stopword,
// domain keyword, filler) with the style's relative weights; a word is written
// fully uppercase with probability `capital_rate`. Targets are built from a
// template whose {echo} slot copies a keyword from the source, so the response
// depends on the message it answers.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "advbot/common/error.hpp"
#include "advbot/common/rng.hpp"
#include "advbot/corpus/types.hpp"

namespace advbot::corpus {

struct StyleWeights {
  double mention = 0.0;
  double hashtag = 0.0;
  double stopword = 0.0;
  double keyword = 0.0;
  double filler = 0.0;
};

struct SyntheticStyle {
  std::string name;
  DomainTag domain;
  Label label = Label::bot;
  StyleWeights weights;
  double capital_rate = 0.0;  // probability a word is written in capitals
  double length_mean = 10.0;
  double length_stddev = 2.0;
  double sentence_break_rate = 0.1;  // probability a word ends a sentence
  double quote_rate = 0.0;           // probability a word is wrapped in double quotes
  std::vector<std::string> keywords;
  std::vector<std::string> hashtags;
  std::vector<std::string> mentions;
  // Target templates: whitespace-separated slots {echo} {kw} {stop} {filler}
  // {mention} {hashtag}, or literal words.
  std::vector<std::string> templates;
  std::uint64_t seed = 0;

  void validate() const {
    const double ws[] = {weights.mention, weights.hashtag, weights.stopword, weights.keyword, weights.filler};
    double total = 0.0;
    for (double w : ws) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("style " + name + ": negative weight");
      total += w;
    }
    if (!(total > 0.0)) throw std::invalid_argument("style " + name + ": weights sum to zero");
    if (capital_rate < 0.0 || capital_rate > 1.0) throw std::invalid_argument("style " + name + ": capital_rate");
    if (weights.keyword > 0.0 && keywords.empty()) throw std::invalid_argument("style " + name + ": no keywords");
    if (weights.hashtag > 0.0 && hashtags.empty()) throw std::invalid_argument("style " + name + ": no hashtags");
    if (weights.mention > 0.0 && mentions.empty()) throw std::invalid_argument("style " + name + ": no mentions");
    if (length_mean < 1.0 || length_stddev < 0.0) throw std::invalid_argument("style " + name + ": length");
  }
};

inline const std::vector<std::string>& generation_stopwords() {
  static const std::vector<std::string> w{"the", "a",  "to",   "and", "of",   "in",  "is",   "it",
                                          "you", "that", "i",  "for", "on",   "with", "this", "my",
                                          "we",  "be", "at",   "so",  "just", "but", "not",  "are",
                                          "was", "have", "me", "your", "all", "what"};
  return w;
}

inline const std::vector<std::string>& generation_fillers() {
  static const std::vector<std::string> w{"day",   "love",  "great",   "time",  "people", "thing",
                                          "really", "good", "think",   "know",  "feel",   "today",
                                          "life",  "friend", "morning", "night", "happy",  "world",
                                          "see",   "home",  "work",    "new",   "still",  "much",
                                          "way",   "want",  "need",    "back",  "fun",    "nice"};
  return w;
}

inline const std::vector<std::string>& generation_mentions() {
  static const std::vector<std::string> w{"@alice", "@bob",  "@carol", "@dave",
                                          "@erin",  "@frank", "@grace", "@heidi"};
  return w;
}

// Built-in styles: one human and the three bot domains.
inline SyntheticStyle builtin_style(const DomainTag& domain) {
  SyntheticStyle s;
  s.domain = domain;
  s.mentions = generation_mentions();
  switch (domain.kind()) {
    case DomainTag::Kind::human:
      s.name = "human";
      s.label = Label::human;
      s.weights = {0.04, 0.02, 0.46, 0.14, 0.34};
      s.capital_rate = 0.03;
      s.length_mean = 12.0;
      s.length_stddev = 3.0;
      s.sentence_break_rate = 0.12;
      s.quote_rate = 0.02;
      s.keywords = {"coffee", "weekend", "movie", "music", "family", "dinner",
                    "book",   "game",    "walk",  "weather", "photo", "birthday"};
      s.hashtags = {"#tbt", "#mood", "#weekend", "#friends"};
      s.templates = {"{stop} {echo} {stop} {filler}", "{filler} {stop} {echo}",
                     "{stop} {stop} {echo} {filler}", "{stop} {filler} {stop} {echo}"};
      break;
    case DomainTag::Kind::bot_political:
      s.name = "bot_political";
      s.weights = {0.30, 0.02, 0.34, 0.14, 0.20};
      s.capital_rate = 0.03;
      s.length_mean = 12.0;
      s.length_stddev = 3.0;
      s.sentence_break_rate = 0.12;
      s.quote_rate = 0.02;
      s.keywords = {"vote",     "election", "party",  "candidate", "senate", "policy",
                    "rally",    "reform",   "campaign", "minister", "debate", "majority"};
      s.hashtags = {"#vote", "#politics", "#elections", "#news"};
      s.templates = {"{mention} {echo} {kw} {mention}", "{echo} {mention} {stop}",
                     "{mention} {mention} {echo} {kw}"};
      break;
    case DomainTag::Kind::bot_financial:
      s.name = "bot_financial";
      s.weights = {0.04, 0.02, 0.40, 0.20, 0.34};
      s.capital_rate = 0.45;
      s.length_mean = 9.0;
      s.length_stddev = 2.0;
      s.sentence_break_rate = 0.15;
      s.quote_rate = 0.02;
      s.keywords = {"app",   "download", "free",  "premium", "install", "bonus",
                    "coins", "offer",    "store", "upgrade", "credits", "deal"};
      s.hashtags = {"#apps", "#android", "#iphone", "#free"};
      s.templates = {"{kw} {echo} {filler} {kw}", "{echo} {kw} {stop}", "{filler} {echo} {kw} {kw}"};
      break;
    case DomainTag::Kind::bot_commercial:
      s.name = "bot_commercial";
      s.weights = {0.04, 0.28, 0.30, 0.18, 0.20};
      s.capital_rate = 0.03;
      s.length_mean = 15.0;
      s.length_stddev = 3.0;
      s.sentence_break_rate = 0.04;
      s.quote_rate = 0.08;
      s.keywords = {"amazon", "product", "discount", "shipping", "price",      "buy",
                    "order",  "sale",    "review",   "bestseller", "gadget", "coupon"};
      s.hashtags = {"#amazon", "#deals", "#shopping", "#sale"};
      s.templates = {"{echo} {kw} {stop} {kw} {hashtag}", "{kw} {echo} {hashtag} {stop}",
                     "{stop} {echo} {kw} {kw}"};
      break;
    default:
      throw std::invalid_argument("no built-in style for domain " + domain.name());
  }
  s.seed = fnv1a64(s.name);
  return s;
}

namespace detail {

enum class Category { mention, hashtag, stopword, keyword, filler };

struct Word {
  std::string text;
  Category category;
};

inline Category draw_category(Rng& rng, const StyleWeights& w) {
  const double ws[] = {w.mention, w.hashtag, w.stopword, w.keyword, w.filler};
  return static_cast<Category>(rng.categorical(ws));
}

inline std::string draw_word(Rng& rng, const SyntheticStyle& s, Category c) {
  switch (c) {
    case Category::mention: return rng.pick(s.mentions);
    case Category::hashtag: return rng.pick(s.hashtags);
    case Category::stopword: return rng.pick(generation_stopwords());
    case Category::keyword: return rng.pick(s.keywords);
    case Category::filler: return rng.pick(generation_fillers());
  }
  return {};
}

inline double category_weight(const StyleWeights& w, Category c) {
  switch (c) {
    case Category::mention: return w.mention;
    case Category::hashtag: return w.hashtag;
    case Category::stopword: return w.stopword;
    case Category::keyword: return w.keyword;
    case Category::filler: return w.filler;
  }
  return 0.0;
}

inline std::size_t draw_length(Rng& rng, const SyntheticStyle& s) {
  const double v = std::round(s.length_mean + s.length_stddev * rng.normal());
  return static_cast<std::size_t>(std::clamp(v, 3.0, 30.0));
}

// Casing, quoting and sentence punctuation applied to a word list.
inline std::string render(Rng& rng, const SyntheticStyle& s, const std::vector<Word>& words) {
  std::string out;
  bool sentence_start = true;
  for (std::size_t i = 0; i < words.size(); ++i) {
    std::string w = words[i].text;
    const bool plain = words[i].category != Category::mention && words[i].category != Category::hashtag;
    if (plain && rng.bernoulli(s.capital_rate)) {
      for (auto& ch : w) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    } else if (plain && sentence_start) {
      w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
    }
    if (plain && rng.bernoulli(s.quote_rate)) w = "\"" + w + "\"";
    sentence_start = false;
    const bool last = i + 1 == words.size();
    if (last || rng.bernoulli(s.sentence_break_rate)) {
      static const char* enders[] = {".", "!", "?"};
      const double ew[] = {0.7, 0.2, 0.1};
      if (!last || rng.bernoulli(0.6)) {
        w += enders[rng.categorical(ew)];
        sentence_start = true;
      }
    }
    if (i) out += ' ';
    out += w;
  }
  return out;
}

}  // namespace detail

// Text-level labeled examples, styles in the given order, `pairs_per_style`
// each, provenance genuine, ids assigned sequentially. Fully determined by the
// seeds.
inline std::vector<TextExample> generate_synthetic_corpus(const std::vector<SyntheticStyle>& styles,
                                                          std::size_t pairs_per_style, std::uint64_t seed) {
  using detail::Category;
  if (styles.empty()) throw std::invalid_argument("generate_synthetic_corpus: empty style list");
  if (pairs_per_style < 1) throw std::invalid_argument("generate_synthetic_corpus: pairs_per_style < 1");
  std::vector<TextExample> out;
  out.reserve(styles.size() * pairs_per_style);
  for (std::size_t si = 0; si < styles.size(); ++si) {
    const auto& style = styles[si];
    style.validate();
    Rng rng(mix_seed(seed, {style.seed, si}));
    for (std::size_t n = 0; n < pairs_per_style; ++n) {
      std::vector<detail::Word> source;
      const std::size_t src_len = detail::draw_length(rng, style);
      for (std::size_t k = 0; k < src_len; ++k) {
        const auto c = detail::draw_category(rng, style.weights);
        source.push_back({detail::draw_word(rng, style, c), c});
      }
      std::vector<std::string> source_keywords;
      for (const auto& w : source) {
        if (w.category == Category::keyword) source_keywords.push_back(w.text);
      }

      std::vector<detail::Word> target;
      if (!style.templates.empty()) {
        const auto& tmpl = rng.pick(style.templates);
        std::size_t pos = 0;
        while (pos < tmpl.size()) {
          const auto end = std::min(tmpl.find(' ', pos), tmpl.size());
          const std::string slot = tmpl.substr(pos, end - pos);
          pos = end + 1;
          if (slot.empty()) continue;
          auto emit = [&](Category c) {
            if (detail::category_weight(style.weights, c) > 0.0) {
              target.push_back({detail::draw_word(rng, style, c), c});
            }
          };
          if (slot == "{echo}") {
            if (!source_keywords.empty()) target.push_back({rng.pick(source_keywords), Category::keyword});
            else emit(Category::keyword);
          } else if (slot == "{kw}") emit(Category::keyword);
          else if (slot == "{stop}") emit(Category::stopword);
          else if (slot == "{filler}") emit(Category::filler);
          else if (slot == "{mention}") emit(Category::mention);
          else if (slot == "{hashtag}") emit(Category::hashtag);
          else target.push_back({slot, Category::filler});
        }
      }
      const std::size_t tgt_len = std::max(detail::draw_length(rng, style), target.size() + 1);
      while (target.size() < tgt_len) {
        const auto c = detail::draw_category(rng, style.weights);
        target.push_back({detail::draw_word(rng, style, c), c});
      }

      TextExample e;
      e.id = out.size();
      e.source = detail::render(rng, style, source);
      e.target = detail::render(rng, style, target);
      e.label = style.label;
      e.domain = style.domain;
      e.provenance = Provenance::genuine;
      out.push_back(std::move(e));
    }
  }
  return out;
}

}  // namespace advbot::corpus
