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

namespace advbot::generator {

using corpus::TokenId;
using corpus::TokenSeq;
using corpus::Vocab;
using diff::LstmParams;
using diff::LstmState;
using diff::Parameter;
using diff::Tensor;

struct GeneratorConfig {
  std::size_t embed_dim = 25;
  std::size_t hidden_dim = 32;
  std::size_t max_len = corpus::kDefaultMaxLen;
  double init_scale = 0.08;
};

// Seq2seq bot: shared embedding table, encoder LSTM, decoder LSTM seeded with
// the encoder's final state, and a projection onto the full vocabulary.
class GeneratorModel {
  // Declared first: the parameter members below are sized from these.
  std::shared_ptr<const Vocab> vocab_;
  GeneratorConfig cfg_;

 public:
  GeneratorModel(std::shared_ptr<const Vocab> vocab, GeneratorConfig cfg, std::uint64_t seed)
      : GeneratorModel(std::move(vocab), cfg) {
    Rng rng(derive_seed(seed, "generator.init"));
    for (auto* p : parameters()) diff::uniform_init(*p, rng, cfg_.init_scale);
  }

  // All parameters zero.
  static GeneratorModel zeros(std::shared_ptr<const Vocab> vocab, GeneratorConfig cfg) {
    return GeneratorModel(std::move(vocab), cfg);
  }

  const Vocab& vocab() const { return *vocab_; }
  const std::shared_ptr<const Vocab>& vocab_ptr() const { return vocab_; }
  const GeneratorConfig& config() const { return cfg_; }
  std::size_t vocab_size() const { return vocab_->size(); }

  std::vector<Parameter*> parameters() {
    return {&embedding, &encoder.weight, &encoder.bias, &decoder.weight, &decoder.bias, &out_weight, &out_bias};
  }
  std::vector<const Parameter*> parameters() const {
    return {&embedding, &encoder.weight, &encoder.bias, &decoder.weight, &decoder.bias, &out_weight, &out_bias};
  }

  Parameter embedding;   // [V, d_emb]
  LstmParams encoder;    // d_emb -> d_h
  LstmParams decoder;    // d_emb -> d_h
  Parameter out_weight;  // [V, d_h]
  Parameter out_bias;    // [V]

  // Set once the model has been through adversarial training.
  bool adversarially_trained = false;

 private:
  GeneratorModel(std::shared_ptr<const Vocab> vocab, GeneratorConfig cfg)
      : vocab_(std::move(vocab)),
        cfg_(cfg),
        embedding("generator.embedding", Tensor({vocab_->size(), cfg.embed_dim})),
        encoder("generator.encoder", cfg.embed_dim, cfg.hidden_dim),
        decoder("generator.decoder", cfg.embed_dim, cfg.hidden_dim),
        out_weight("generator.out.weight", Tensor({vocab_->size(), cfg.hidden_dim})),
        out_bias("generator.out.bias", Tensor({vocab_->size()})) {
    if (cfg.embed_dim == 0 || cfg.hidden_dim == 0 || cfg.max_len == 0) {
      throw std::invalid_argument("GeneratorConfig: dimensions must be positive");
    }
  }
};

inline nlohmann::ordered_json generator_checkpoint(const GeneratorModel& m) {
  nlohmann::ordered_json meta;
  meta["embed_dim"] = m.config().embed_dim;
  meta["hidden_dim"] = m.config().hidden_dim;
  meta["max_len"] = m.config().max_len;
  meta["adversarially_trained"] = m.adversarially_trained;
  meta["vocab"] = m.vocab().tokens();
  return diff::params_to_json("generator", meta, m.parameters());
}

inline void save_generator(const std::string& path, const GeneratorModel& m) {
  diff::write_json_file(path, generator_checkpoint(m));
}

inline GeneratorModel load_generator(const std::string& path) {
  const auto j = diff::read_json_file(path);
  try {
    const auto& meta = j.at("meta");
    const auto tokens = meta.at("vocab").get<std::vector<std::string>>();
    if (tokens.size() < corpus::kNumReserved) throw DataError("checkpoint vocab too small");
    auto vocab = std::make_shared<Vocab>(std::vector<std::string>(tokens.begin() + corpus::kNumReserved, tokens.end()));
    if (vocab->tokens() != tokens) throw DataError("checkpoint vocab has unexpected reserved tokens");
    GeneratorConfig cfg;
    cfg.embed_dim = meta.at("embed_dim").get<std::size_t>();
    cfg.hidden_dim = meta.at("hidden_dim").get<std::size_t>();
    cfg.max_len = meta.at("max_len").get<std::size_t>();
    auto model = GeneratorModel::zeros(std::move(vocab), cfg);
    diff::params_from_json(j, "generator", model.parameters());
    model.adversarially_trained = meta.value("adversarially_trained", false);
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": malformed generator checkpoint: " + e.what());
  }
}

}  // namespace advbot::generator
