#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "advbot/common/rng.hpp"
#include "advbot/corpus/types.hpp"
#include "advbot/diffcore/checkpoint.hpp"
#include "advbot/diffcore/lstm.hpp"

namespace advbot::detector {

using corpus::TokenId;
using corpus::TokenSeq;
using corpus::Vocab;
using diff::LstmParams;
using diff::LstmState;
using diff::Parameter;
using diff::Tensor;

struct DetectorConfig {
  std::size_t embed_dim = 25;
  std::size_t hidden_dim = 32;
  double init_scale = 0.08;
};

// Contextual LSTM: separate recurrent passes over the source message and the
// response; their final hidden states are concatenated into a logistic head.
class DetectorModel {
  std::shared_ptr<const Vocab> vocab_;
  DetectorConfig cfg_;

 public:
  DetectorModel(std::shared_ptr<const Vocab> vocab, DetectorConfig cfg, std::uint64_t seed)
      : DetectorModel(std::move(vocab), cfg) {
    Rng rng(derive_seed(seed, "detector.init"));
    for (auto* p : parameters()) diff::uniform_init(*p, rng, cfg_.init_scale);
  }

  static DetectorModel zeros(std::shared_ptr<const Vocab> vocab, DetectorConfig cfg) {
    return DetectorModel(std::move(vocab), cfg);
  }

  const Vocab& vocab() const { return *vocab_; }
  const std::shared_ptr<const Vocab>& vocab_ptr() const { return vocab_; }
  const DetectorConfig& config() const { return cfg_; }

  std::vector<Parameter*> parameters() {
    return {&embedding, &source_rnn.weight, &source_rnn.bias, &response_rnn.weight, &response_rnn.bias,
            &head_weight, &head_bias};
  }
  std::vector<const Parameter*> parameters() const {
    return {&embedding, &source_rnn.weight, &source_rnn.bias, &response_rnn.weight, &response_rnn.bias,
            &head_weight, &head_bias};
  }

  Parameter embedding;      // [V, d_emb], independent of the generator's
  LstmParams source_rnn;    // d_emb -> d_h
  LstmParams response_rnn;  // d_emb -> d_h
  Parameter head_weight;    // [1, 2 d_h]
  Parameter head_bias;      // [1]

 private:
  DetectorModel(std::shared_ptr<const Vocab> vocab, DetectorConfig cfg)
      : vocab_(std::move(vocab)),
        cfg_(cfg),
        embedding("detector.embedding", Tensor({vocab_->size(), cfg.embed_dim})),
        source_rnn("detector.source_rnn", cfg.embed_dim, cfg.hidden_dim),
        response_rnn("detector.response_rnn", cfg.embed_dim, cfg.hidden_dim),
        head_weight("detector.head.weight", Tensor({1, 2 * cfg.hidden_dim})),
        head_bias("detector.head.bias", Tensor({1})) {
    if (cfg.embed_dim == 0 || cfg.hidden_dim == 0) throw std::invalid_argument("DetectorConfig: zero dimension");
  }
};

inline void save_detector(const std::string& path, const DetectorModel& m) {
  nlohmann::ordered_json meta;
  meta["embed_dim"] = m.config().embed_dim;
  meta["hidden_dim"] = m.config().hidden_dim;
  meta["vocab"] = m.vocab().tokens();
  diff::write_json_file(path, diff::params_to_json("detector", meta, m.parameters()));
}

inline DetectorModel load_detector(const std::string& path) {
  const auto j = diff::read_json_file(path);
  try {
    const auto& meta = j.at("meta");
    const auto tokens = meta.at("vocab").get<std::vector<std::string>>();
    if (tokens.size() < corpus::kNumReserved) throw DataError("checkpoint vocab too small");
    auto vocab = std::make_shared<Vocab>(std::vector<std::string>(tokens.begin() + corpus::kNumReserved, tokens.end()));
    if (vocab->tokens() != tokens) throw DataError("checkpoint vocab has unexpected reserved tokens");
    DetectorConfig cfg;
    cfg.embed_dim = meta.at("embed_dim").get<std::size_t>();
    cfg.hidden_dim = meta.at("hidden_dim").get<std::size_t>();
    auto model = DetectorModel::zeros(std::move(vocab), cfg);
    diff::params_from_json(j, "detector", model.parameters());
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": malformed detector checkpoint: " + e.what());
  }
}

}  // namespace advbot::detector
