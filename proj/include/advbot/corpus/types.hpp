#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "advbot/common/error.hpp"

namespace advbot::corpus {

using TokenId = std::int32_t;

inline constexpr TokenId kPad = 0;
inline constexpr TokenId kBos = 1;
inline constexpr TokenId kEos = 2;
inline constexpr TokenId kUnk = 3;
inline constexpr std::size_t kNumReserved = 4;
inline constexpr std::size_t kDefaultMaxLen = 32;

// Dense bijection token <-> id with PAD, BOS, EOS, UNK at ids 0..3.
class Vocab {
 public:
  Vocab() : tokens_{"<pad>", "<bos>", "<eos>", "<unk>"} {
    for (std::size_t i = 0; i < tokens_.size(); ++i) index_.emplace(tokens_[i], static_cast<TokenId>(i));
  }

  explicit Vocab(const std::vector<std::string>& content) : Vocab() {
    for (const auto& t : content) {
      if (!add(t)) throw std::invalid_argument("duplicate or reserved vocab token: " + t);
    }
  }

  // Appends a token; returns false if it is already present.
  bool add(const std::string& token) {
    if (index_.contains(token)) return false;
    index_.emplace(token, static_cast<TokenId>(tokens_.size()));
    tokens_.push_back(token);
    return true;
  }

  std::size_t size() const { return tokens_.size(); }
  bool contains(std::string_view token) const { return index_.contains(std::string(token)); }

  // Unknown tokens, and text spelling a reserved token, map to UNK.
  TokenId id(std::string_view token) const {
    auto it = index_.find(std::string(token));
    if (it == index_.end() || it->second < static_cast<TokenId>(kNumReserved)) return kUnk;
    return it->second;
  }

  const std::string& token(TokenId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
      throw std::out_of_range("token id out of range: " + std::to_string(id));
    }
    return tokens_[static_cast<std::size_t>(id)];
  }

  const std::vector<std::string>& tokens() const { return tokens_; }

  bool operator==(const Vocab& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

struct TokenSeq {
  std::vector<TokenId> ids;

  std::size_t size() const { return ids.size(); }
  bool empty() const { return ids.empty(); }
  TokenId operator[](std::size_t i) const { return ids[i]; }
  bool operator==(const TokenSeq&) const = default;
};

struct ConversationPair {
  TokenSeq source;
  TokenSeq target;
  std::string raw_source;
  std::string raw_target;
};

enum class Label : int { bot = 0, human = 1 };
enum class Provenance { genuine, pinched_attack, generated_attack };

inline int as_int(Label l) { return static_cast<int>(l); }

inline std::string_view to_string(Label l) { return l == Label::human ? "human" : "bot"; }

inline Label parse_label(std::string_view s) {
  if (s == "human" || s == "1") return Label::human;
  if (s == "bot" || s == "0") return Label::bot;
  throw DataError("unknown label: '" + std::string(s) + "'");
}

inline std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::genuine: return "genuine";
    case Provenance::pinched_attack: return "pinched_attack";
    case Provenance::generated_attack: return "generated_attack";
  }
  return "genuine";
}

inline Provenance parse_provenance(std::string_view s) {
  if (s == "genuine") return Provenance::genuine;
  if (s == "pinched_attack") return Provenance::pinched_attack;
  if (s == "generated_attack") return Provenance::generated_attack;
  throw DataError("unknown provenance: '" + std::string(s) + "'");
}

class DomainTag {
 public:
  enum class Kind { human, bot_political, bot_financial, bot_commercial, bot_combined, custom };

  DomainTag() = default;
  DomainTag(Kind kind) : kind_(kind) {}  // NOLINT(google-explicit-constructor)

  static DomainTag custom(std::string name) {
    DomainTag d(Kind::custom);
    d.name_ = std::move(name);
    return d;
  }

  static DomainTag parse(std::string_view s) {
    if (s == "human") return Kind::human;
    if (s == "bot_political") return Kind::bot_political;
    if (s == "bot_financial") return Kind::bot_financial;
    if (s == "bot_commercial") return Kind::bot_commercial;
    if (s == "bot_combined") return Kind::bot_combined;
    if (s.empty()) throw DataError("empty domain tag");
    return custom(std::string(s));
  }

  Kind kind() const { return kind_; }

  std::string name() const {
    switch (kind_) {
      case Kind::human: return "human";
      case Kind::bot_political: return "bot_political";
      case Kind::bot_financial: return "bot_financial";
      case Kind::bot_commercial: return "bot_commercial";
      case Kind::bot_combined: return "bot_combined";
      case Kind::custom: return name_;
    }
    return name_;
  }

  bool is_builtin_bot() const {
    return kind_ == Kind::bot_political || kind_ == Kind::bot_financial ||
           kind_ == Kind::bot_commercial || kind_ == Kind::bot_combined;
  }

  // True if an example tagged `other` belongs to this domain; bot_combined is the
  // union of the three bot domains.
  bool covers(const DomainTag& other) const {
    if (kind_ == Kind::bot_combined) {
      return other.kind_ == Kind::bot_political || other.kind_ == Kind::bot_financial ||
             other.kind_ == Kind::bot_commercial || other.kind_ == Kind::bot_combined;
    }
    return *this == other;
  }

  bool operator==(const DomainTag& o) const {
    return kind_ == o.kind_ && (kind_ != Kind::custom || name_ == o.name_);
  }
  bool operator<(const DomainTag& o) const { return name() < o.name(); }

 private:
  Kind kind_ = Kind::human;
  std::string name_;
};

inline const std::vector<DomainTag>& component_bot_domains() {
  static const std::vector<DomainTag> d{DomainTag::Kind::bot_political, DomainTag::Kind::bot_financial,
                                        DomainTag::Kind::bot_commercial};
  return d;
}

// Text-level example: one JSONL row, synthetic output, or ingested pair.
struct TextExample {
  std::uint64_t id = 0;
  std::string source;
  std::string target;
  Label label = Label::human;
  DomainTag domain;
  Provenance provenance = Provenance::genuine;

  bool operator==(const TextExample&) const = default;
};

// Model-ready example.
struct LabeledExample {
  std::uint64_t id = 0;
  ConversationPair pair;
  Label label = Label::human;
  Provenance provenance = Provenance::genuine;
  DomainTag domain;
};

inline TextExample to_text(const LabeledExample& e) {
  return {e.id, e.pair.raw_source, e.pair.raw_target, e.label, e.domain, e.provenance};
}

}  // namespace advbot::corpus
