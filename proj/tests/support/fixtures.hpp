#pragma once

#include <memory>
#include <string>
#include <vector>

#include "advbot/common/rng.hpp"
#include "advbot/corpus/types.hpp"

namespace advbot::testing {

// Reserved tokens plus w0..w{n-1}.
inline std::shared_ptr<const corpus::Vocab> small_vocab(std::size_t n) {
  std::vector<std::string> words;
  for (std::size_t i = 0; i < n; ++i) words.push_back("w" + std::to_string(i));
  return std::make_shared<const corpus::Vocab>(words);
}

// Random non-reserved ids, length in [lo, hi].
inline corpus::TokenSeq random_seq(Rng& rng, const corpus::Vocab& v, std::size_t lo, std::size_t hi) {
  corpus::TokenSeq s;
  const std::size_t n = lo + rng.below(hi - lo + 1);
  for (std::size_t i = 0; i < n; ++i) {
    s.ids.push_back(static_cast<corpus::TokenId>(corpus::kNumReserved + rng.below(v.size() - corpus::kNumReserved)));
  }
  return s;
}

inline corpus::ConversationPair random_pair(Rng& rng, const corpus::Vocab& v, std::size_t lo = 1, std::size_t hi = 4) {
  corpus::ConversationPair p;
  p.source = random_seq(rng, v, lo, hi);
  p.target = random_seq(rng, v, lo, hi);
  return p;
}

}  // namespace advbot::testing
