#pragma once

// End-to-end scenario runners behind the command-line tool. Every scenario
// writes `resolved.config` first and `manifest.json` (artifact digests) last.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "advbot/adversarial/game.hpp"
#include "advbot/analysis/auc.hpp"
#include "advbot/analysis/crossdomain.hpp"
#include "advbot/analysis/features.hpp"
#include "advbot/analysis/logistic.hpp"
#include "advbot/analysis/shapley.hpp"
#include "advbot/cli/config.hpp"
#include "advbot/common/csv.hpp"
#include "advbot/common/diagnostics.hpp"
#include "advbot/common/digest.hpp"
#include "advbot/common/error.hpp"
#include "advbot/common/rng.hpp"
#include "advbot/common/svg.hpp"
#include "advbot/corpus/conversations.hpp"
#include "advbot/corpus/io.hpp"
#include "advbot/corpus/manifest.hpp"
#include "advbot/corpus/split.hpp"
#include "advbot/corpus/synthetic.hpp"
#include "advbot/corpus/tokenize.hpp"
#include "advbot/detector/model.hpp"
#include "advbot/detector/ops.hpp"
#include "advbot/generator/model.hpp"
#include "advbot/generator/ops.hpp"
#include "advbot/poisoning/poison.hpp"

namespace advbot::cli {

namespace fs = std::filesystem;
using corpus::LabeledExample;
using corpus::TextExample;

inline const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"synth",   "pretrain-bot", "pretrain-detector", "adversarial",
                                              "poison",  "explain",      "crossdomain",       "validate-data"};
  return names;
}

// Output directory plus the list of files written into it.
class RunContext {
 public:
  RunContext(std::string scenario, Config cfg, fs::path out_dir, bool force)
      : scenario_(std::move(scenario)), cfg_(std::move(cfg)), out_(std::move(out_dir)) {
    if (fs::exists(out_)) {
      if (!fs::is_directory(out_)) throw ConfigError("output path exists and is not a directory: " + out_.string());
      if (!fs::is_empty(out_) && !force) {
        throw ConfigError("output directory " + out_.string() + " is not empty (use --force to overwrite)");
      }
    } else {
      fs::create_directories(out_);
    }
    write("resolved.config", cfg_.resolved_text());
  }

  const Config& config() const { return cfg_; }
  Diagnostics* diag() { return &diag_; }
  fs::path path(const std::string& name) const { return out_ / name; }

  void write(const std::string& name, const std::string& bytes) {
    std::ofstream out(path(name), std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path(name).string());
    out << bytes;
    if (!out) throw DataError("write failed: " + path(name).string());
    record(name);
  }

  // For files written by other code directly into the output directory.
  void record(const std::string& name) {
    if (std::find(artifacts_.begin(), artifacts_.end(), name) == artifacts_.end()) artifacts_.push_back(name);
  }

  void finish() {
    std::vector<std::string> names = artifacts_;
    std::sort(names.begin(), names.end());
    nlohmann::ordered_json j;
    j["scenario"] = scenario_;
    j["artifacts"] = nlohmann::ordered_json::array();
    for (const auto& n : names) j["artifacts"].push_back({{"file", n}, {"sha256", sha256_file(path(n).string())}});
    j["warnings"] = diag_.warnings;
    std::ofstream out(path("manifest.json"), std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write manifest.json");
    out << j.dump(2) << '\n';
    for (const auto& w : diag_.warnings) std::cerr << "warning: " << w << '\n';
  }

 private:
  std::string scenario_;
  Config cfg_;
  fs::path out_;
  Diagnostics diag_;
  std::vector<std::string> artifacts_;
};

// ---------------------------------------------------------------------------
// Shared plumbing.

inline std::uint64_t master_seed(const Config& c) { return c.u64("run.seed"); }

inline unsigned thread_count(const Config& c) {
  const auto n = c.count("run.threads");
  if (n == 0) throw ConfigError("run.threads must be >= 1");
  return static_cast<unsigned>(n);
}

inline diff::OptimizerConfig optimizer_of(const Config& c, const std::string& kind_key, const std::string& lr_key) {
  diff::OptimizerConfig o;
  o.kind = diff::parse_optimizer_kind(c.str(kind_key));
  o.lr = c.real(lr_key);
  if (!(o.lr > 0.0)) throw ConfigError(lr_key + " must be positive");
  return o;
}

inline generator::GeneratorConfig generator_config(const Config& c) {
  generator::GeneratorConfig g;
  g.embed_dim = c.count("generator.embed_dim");
  g.hidden_dim = c.count("generator.hidden_dim");
  g.init_scale = c.real("generator.init_scale");
  g.max_len = c.count("corpus.max_len");
  if (g.embed_dim == 0 || g.hidden_dim == 0 || g.max_len == 0) {
    throw ConfigError("generator dimensions and corpus.max_len must be >= 1");
  }
  return g;
}

inline detector::DetectorConfig detector_config(const Config& c) {
  detector::DetectorConfig d;
  d.embed_dim = c.count("detector.embed_dim");
  d.hidden_dim = c.count("detector.hidden_dim");
  d.init_scale = c.real("detector.init_scale");
  if (d.embed_dim == 0 || d.hidden_dim == 0) throw ConfigError("detector dimensions must be >= 1");
  return d;
}

inline detector::DetectorTrainConfig detector_train_config(const Config& c, std::size_t steps, std::uint64_t seed) {
  detector::DetectorTrainConfig t;
  t.steps = steps;
  t.batch_size = c.count("detector.batch_size");
  if (t.batch_size < 2) throw ConfigError("detector.batch_size must be >= 2");
  t.optimizer = optimizer_of(c, "detector.optimizer", "detector.lr");
  t.seed = seed;
  return t;
}

struct Dataset {
  std::shared_ptr<const corpus::Vocab> vocab;
  std::vector<LabeledExample> train;
  std::vector<LabeledExample> test;
};

// Reads paths.data, tokenizes with `vocab` (or a vocabulary built from every
// text in the file) and applies the stratified split.
inline Dataset load_dataset(const Config& c, std::shared_ptr<const corpus::Vocab> vocab, Diagnostics* diag) {
  const auto texts = corpus::read_jsonl(c.required("paths.data"));
  if (texts.empty()) throw DataError("corpus " + c.str("paths.data") + " is empty");
  if (!vocab) {
    std::vector<std::string> all;
    all.reserve(2 * texts.size());
    for (const auto& t : texts) {
      all.push_back(t.source);
      all.push_back(t.target);
    }
    vocab = std::make_shared<const corpus::Vocab>(
        corpus::build_vocab(all, c.count("corpus.min_count"), c.count("corpus.max_vocab"), diag));
  }
  const auto examples = corpus::tokenize_examples(texts, *vocab, c.count("corpus.max_len"), diag);
  const double test_fraction = c.real("corpus.test_fraction");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ConfigError("corpus.test_fraction must be in (0, 1)");
  auto split = corpus::split_dataset(examples, {1.0 - test_fraction, test_fraction},
                                     derive_seed(master_seed(c), "split"));
  return {vocab, std::move(split.train), std::move(split.test)};
}

inline std::vector<LabeledExample> with_label(const std::vector<LabeledExample>& xs, corpus::Label l) {
  std::vector<LabeledExample> out;
  for (const auto& e : xs) {
    if (e.label == l) out.push_back(e);
  }
  return out;
}

inline std::vector<TextExample> texts_of(const std::vector<LabeledExample>& xs) {
  std::vector<TextExample> out;
  out.reserve(xs.size());
  for (const auto& e : xs) out.push_back(corpus::to_text(e));
  return out;
}

inline std::optional<generator::GeneratorModel> maybe_generator(const Config& c) {
  if (c.str("paths.generator").empty()) return std::nullopt;
  return generator::load_generator(c.str("paths.generator"));
}

inline std::optional<detector::DetectorModel> maybe_detector(const Config& c) {
  if (c.str("paths.detector").empty()) return std::nullopt;
  return detector::load_detector(c.str("paths.detector"));
}

inline generator::DecodingConfig decoding_of(const Config& c, const generator::GeneratorModel& bot) {
  generator::DecodingConfig d;
  d.temperature = c.real("game.temperature");
  d.max_len = bot.config().max_len;
  d.validate(bot);
  return d;
}

inline std::string metrics_csv(const std::vector<std::pair<std::string, std::optional<double>>>& kv) {
  std::vector<csv::Row> rows{{"metric", "value"}};
  for (const auto& [k, v] : kv) rows.push_back({k, v ? csv::format_double(*v) : "nan"});
  return csv::to_string(rows);
}

inline std::string evaluation_csv(const detector::Evaluation& e) {
  return metrics_csv({{"n", static_cast<double>(e.n)},
                      {"accuracy", e.accuracy},
                      {"auc", e.auc},
                      {"mean_prob_human", e.mean_prob_human},
                      {"mean_prob_bot", e.mean_prob_bot}});
}

inline void save_detector_artifact(RunContext& ctx, const std::string& name, const detector::DetectorModel& m) {
  detector::save_detector(ctx.path(name).string(), m);
  ctx.record(name);
}

inline void save_generator_artifact(RunContext& ctx, const std::string& name, const generator::GeneratorModel& m) {
  generator::save_generator(ctx.path(name).string(), m);
  ctx.record(name);
}

// ---------------------------------------------------------------------------
// Scenarios.

inline void run_synth(RunContext& ctx) {
  const auto& c = ctx.config();
  std::vector<corpus::SyntheticStyle> styles;
  for (const auto& name : c.list("synth.styles")) {
    try {
      styles.push_back(corpus::builtin_style(corpus::DomainTag::parse(name)));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("synth.styles: ") + e.what());
    }
  }
  if (styles.empty()) throw ConfigError("synth.styles is empty");
  const auto n = c.count("synth.pairs_per_style");
  if (n == 0) throw ConfigError("synth.pairs_per_style must be >= 1");
  const auto texts = corpus::generate_synthetic_corpus(styles, n, derive_seed(master_seed(c), "synth"));
  ctx.write("corpus.jsonl", corpus::to_jsonl(texts));
  ctx.write("corpus_manifest.json", corpus::to_json(corpus::manifest_of(texts)).dump(2) + "\n");
  ctx.finish();
}

inline void run_pretrain_bot(RunContext& ctx) {
  const auto& c = ctx.config();
  const auto seed = master_seed(c);
  const auto data = load_dataset(c, nullptr, ctx.diag());
  const auto domain = corpus::DomainTag::parse(c.str("generator.train_domain"));
  std::vector<corpus::ConversationPair> train, test;
  for (const auto& e : data.train) {
    if (domain.covers(e.domain)) train.push_back(e.pair);
  }
  for (const auto& e : data.test) {
    if (domain.covers(e.domain)) test.push_back(e.pair);
  }
  if (train.empty()) throw DataError("no training pairs in domain " + domain.name());

  generator::GeneratorModel bot(data.vocab, generator_config(c), derive_seed(seed, "generator"));
  generator::MleConfig mle;
  mle.epochs = c.count("generator.epochs");
  mle.batch_size = c.count("generator.batch_size");
  if (mle.batch_size == 0) throw ConfigError("generator.batch_size must be >= 1");
  mle.optimizer = optimizer_of(c, "generator.optimizer", "generator.lr");
  mle.seed = derive_seed(seed, "mle");
  const auto result = generator::pretrain_mle(bot, train, mle);

  ctx.write("mle_trace.csv", generator::epoch_trace_csv(result.trace));
  save_generator_artifact(ctx, "generator.ckpt.json", bot);
  std::optional<double> test_ppl;
  if (!test.empty() && !result.aborted) test_ppl = generator::perplexity(bot, test);
  ctx.write("metrics.csv", metrics_csv({{"train_pairs", static_cast<double>(train.size())},
                                        {"vocab_size", static_cast<double>(data.vocab->size())},
                                        {"final_train_perplexity", result.trace.back().perplexity},
                                        {"test_perplexity", test_ppl}}));
  ctx.finish();
  if (result.aborted) throw NumericError("pretrain-bot: training diverged: " + *result.aborted);
}

inline void run_pretrain_detector(RunContext& ctx) {
  const auto& c = ctx.config();
  const auto seed = master_seed(c);
  const auto threads = thread_count(c);
  auto bot = maybe_generator(c);
  const auto data = load_dataset(c, bot ? bot->vocab_ptr() : nullptr, ctx.diag());
  const auto human_train = with_label(data.train, corpus::Label::human);
  const auto human_test = with_label(data.test, corpus::Label::human);
  if (human_train.empty() || human_test.empty()) throw DataError("pretrain-detector: need human pairs in both splits");

  detector::DetectorModel det(data.vocab, detector_config(c), derive_seed(seed, "detector"));
  auto tc = detector_train_config(c, c.count("detector.steps"), derive_seed(seed, "detector.train"));
  const auto real = corpus::pairs_of(human_train);
  detector::DetectorTrainTrace trace;
  std::vector<LabeledExample> testset = human_test;
  if (bot) {
    tc.decoding = decoding_of(c, *bot);
    trace = detector::pretrain_detector(det, real, &*bot, tc);
    const auto eval_seed = derive_seed(seed, "detector.eval");
    for (std::size_t i = 0; i < human_test.size(); ++i) {
      testset.push_back(detector::as_example(
          detector::generated_pair(*bot, human_test[i].pair.source, tc.decoding, mix_seed(eval_seed, {i})),
          corpus::Label::bot, corpus::Provenance::generated_attack));
    }
  } else {
    const auto fakes = corpus::pairs_of(with_label(data.train, corpus::Label::bot));
    if (fakes.empty()) throw DataError("pretrain-detector: no generator given and no bot pairs in the corpus");
    trace = detector::pretrain_detector(det, real, std::span<const corpus::ConversationPair>(fakes), tc);
    const auto bots = with_label(data.test, corpus::Label::bot);
    testset.insert(testset.end(), bots.begin(), bots.end());
  }

  ctx.write("detector_trace.csv", detector::loss_trace_csv(trace.losses));
  save_detector_artifact(ctx, "detector.ckpt.json", det);
  if (!trace.aborted) ctx.write("metrics.csv", evaluation_csv(detector::evaluate(det, testset, threads)));
  ctx.finish();
  if (trace.aborted) throw NumericError("pretrain-detector: training diverged: " + *trace.aborted);
}

inline void run_adversarial(RunContext& ctx, bool cold_start) {
  const auto& c = ctx.config();
  const auto seed = master_seed(c);
  cold_start = cold_start || c.boolean("game.cold_start");
  auto bot = maybe_generator(c);
  auto det = maybe_detector(c);
  if (!cold_start && (!bot || !det)) {
    throw ConfigError(std::string("adversarial: missing pretrained ") + (!bot ? "generator" : "detector") +
                      " checkpoint; run pretrain-bot and pretrain-detector first and set paths.generator and "
                      "paths.detector, or pass --cold-start");
  }
  std::shared_ptr<const corpus::Vocab> vocab = bot ? bot->vocab_ptr() : det ? det->vocab_ptr() : nullptr;
  const auto data = load_dataset(c, vocab, ctx.diag());
  if (!bot) bot.emplace(data.vocab, generator_config(c), derive_seed(seed, "generator"));
  if (!det) det.emplace(data.vocab, detector_config(c), derive_seed(seed, "detector"));
  if (!(bot->vocab() == det->vocab())) throw ConfigError("adversarial: generator and detector vocabularies differ");

  adversarial::GameData gd;
  gd.real = corpus::pairs_of(with_label(data.train, corpus::Label::human));
  gd.heldout = corpus::pairs_of(with_label(data.test, corpus::Label::human));
  if (gd.real.empty() || gd.heldout.empty()) throw DataError("adversarial: need human pairs in both splits");

  adversarial::GameConfig g;
  g.iterations = c.count("game.iterations");
  g.bd_steps = c.count("game.bd_steps");
  g.b_steps = c.count("game.b_steps");
  g.n_roll = c.count("game.n_roll");
  g.batch_size = c.count("game.batch_size");
  g.baseline_window = c.count("game.baseline_window");
  g.detector_update_in_b_steps = c.boolean("game.detector_update_in_b_steps");
  g.teacher_forcing_steps = c.count("game.teacher_forcing_steps");
  g.seed = derive_seed(seed, "game");
  g.bot_optimizer = optimizer_of(c, "generator.optimizer", "game.bot_lr");
  g.detector_optimizer = optimizer_of(c, "detector.optimizer", "game.detector_lr");
  g.decoding = decoding_of(c, *bot);
  g.metric_samples = c.count("game.metric_samples");
  g.threads = thread_count(c);
  g.record_timing = c.boolean("game.record_timing");
  const auto trace = adversarial::run_game(*bot, *det, gd, g);

  ctx.write("trace.csv", adversarial::trace_csv(trace.records));
  ctx.write("trace.svg", adversarial::trace_svg(trace.records));
  save_generator_artifact(ctx, "generator_adversarial.ckpt.json", *bot);
  save_detector_artifact(ctx, "detector_adversarial.ckpt.json", *det);
  ctx.finish();
  if (trace.aborted) throw NumericError("adversarial: game stopped on a numeric failure: " + *trace.aborted);
}

inline void run_poison(RunContext& ctx, bool retrain) {
  const auto& c = ctx.config();
  const auto seed = master_seed(c);
  const auto threads = thread_count(c);
  retrain = retrain || c.boolean("poison.retrain");
  const std::string mode = c.str("poison.mode");
  if (mode != "pinched" && mode != "generated") throw ConfigError("poison.mode must be pinched or generated");
  poisoning::PoisonConfig pc;
  pc.fraction = c.real("poison.fraction");
  pc.replace = c.boolean("poison.replace");
  pc.seed = derive_seed(seed, "poison");
  pc.validate();
  const auto bins = c.count("poison.bins");
  if (bins == 0) throw ConfigError("poison.bins must be >= 1");

  auto bot = maybe_generator(c);
  auto det = maybe_detector(c);
  if (mode == "generated" && !bot) throw ConfigError("poison: generated mode needs paths.generator");
  std::shared_ptr<const corpus::Vocab> vocab = det ? det->vocab_ptr() : bot ? bot->vocab_ptr() : nullptr;
  const auto data = load_dataset(c, vocab, ctx.diag());
  if (bot && !(bot->vocab() == *data.vocab)) throw ConfigError("poison: generator and detector vocabularies differ");

  const auto train_steps = c.count("poison.train_steps");
  if (!det) {
    det.emplace(data.vocab, detector_config(c), derive_seed(seed, "detector"));
    const auto tr = detector::train_detector(*det, data.train,
                                             detector_train_config(c, train_steps, derive_seed(seed, "poison.train")));
    if (tr.aborted) throw NumericError("poison: detector training diverged: " + *tr.aborted);
    save_detector_artifact(ctx, "detector.ckpt.json", *det);
  }

  // Attacks sized for `base`: pinched ones come from the human training pool,
  // generated ones answer sources of `base`.
  const auto pinched_pool = with_label(data.train, corpus::Label::human);
  const auto attacks_for = [&](std::span<const LabeledExample> base, const std::string& tag) {
    std::size_t n_bot = 0;
    for (const auto& e : base) n_bot += e.label == corpus::Label::bot;
    const auto needed = static_cast<std::size_t>(std::llround(pc.fraction * static_cast<double>(n_bot)));
    std::vector<LabeledExample> attacks;
    if (mode == "pinched") {
      attacks = poisoning::select_pinched_examples(*det, pinched_pool, std::min(needed, pinched_pool.size()),
                                                   poisoning::parse_selection_rule(c.str("poison.rule")),
                                                   derive_seed(seed, "pinched." + tag), threads);
    } else {
      std::vector<corpus::TokenSeq> sources;
      for (const auto& e : base) sources.push_back(e.pair.source);
      attacks = poisoning::generate_attack_examples(*bot, sources, needed, derive_seed(seed, "attacks." + tag),
                                                    decoding_of(c, *bot), c.boolean("poison.allow_untrained"));
    }
    if (attacks.empty()) throw DataError("poison: the requested fraction yields no attack examples");
    return attacks;
  };
  const auto poisoned = poisoning::poison_dataset(data.test, attacks_for(data.test, "test"), pc);

  const detector::DetectorModel* scorer = &*det;
  std::optional<detector::DetectorModel> retrained;
  if (retrain) {
    const auto poisoned_train = poisoning::poison_dataset(data.train, attacks_for(data.train, "train"), pc);
    retrained.emplace(data.vocab, detector_config(c), derive_seed(seed, "detector.retrain"));
    const auto tr = detector::train_detector(
        *retrained, poisoned_train, detector_train_config(c, train_steps, derive_seed(seed, "poison.retrain")));
    if (tr.aborted) throw NumericError("poison: retraining diverged: " + *tr.aborted);
    save_detector_artifact(ctx, "detector_retrained.ckpt.json", *retrained);
    scorer = &*retrained;
  }

  const auto summary = poisoning::evaluate_under_poisoning(*scorer, poisoned, bins, ctx.diag(), threads);
  ctx.write("poisoned.jsonl", corpus::to_jsonl(texts_of(poisoned)));
  ctx.write("histograms.csv", poisoning::histogram_csv(summary.histograms));
  ctx.write("summary.csv", poisoning::summary_csv(summary));
  ctx.write("histograms.svg", poisoning::histogram_svg(summary.histograms, "Detector probability_human by class (" +
                                                                              mode + " attacks)"));
  ctx.finish();
}

inline void run_explain(RunContext& ctx) {
  const auto& c = ctx.config();
  const auto seed = master_seed(c);
  const auto data = load_dataset(c, nullptr, ctx.diag());
  const std::string method = c.str("explain.method");
  if (method != "exact" && method != "sampled") throw ConfigError("explain.method must be exact or sampled");
  analysis::LogisticConfig lc;
  lc.l2 = c.real("explain.l2");
  if (lc.l2 < 0.0) throw ConfigError("explain.l2 must be >= 0");

  const auto train_rows = analysis::feature_rows(data.train);
  const auto test_rows = analysis::feature_rows(data.test);
  const auto model = analysis::fit_logistic(train_rows, detector::labels_of(data.train), lc, ctx.diag());
  const auto reference = analysis::column_means(train_rows);
  const auto f = [&model](std::span<const double> x) { return model.probability(x); };

  const auto instances = c.count("explain.instances");
  const auto permutations = c.count("explain.permutations");
  const auto names = analysis::feature_names();
  std::vector<csv::Row> rows{{"instance_id", "feature", "value", "phi", "se"}};
  std::vector<double> mean_abs(analysis::kNumFeatures, 0.0);
  std::size_t explained = 0;
  for (std::size_t i = 0; i < data.test.size() && explained < instances; ++i) {
    if (data.test[i].label != corpus::Label::bot) continue;
    const auto& x = test_rows[i];
    const auto e = method == "exact"
                       ? analysis::exact_shapley_reference(f, x, reference)
                       : analysis::sampled_shapley_reference(f, x, reference, permutations,
                                                             derive_seed(seed, "explain", data.test[i].id));
    analysis::append_shapley_rows(rows, data.test[i].id, names, x, e);
    for (std::size_t j = 0; j < e.phi.size(); ++j) mean_abs[j] += std::abs(e.phi[j]);
    ++explained;
  }
  if (explained == 0) throw DataError("explain: no bot examples in the test split");
  for (auto& v : mean_abs) v /= static_cast<double>(explained);

  std::vector<std::size_t> order(analysis::kNumFeatures);
  for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return mean_abs[a] > mean_abs[b]; });
  std::vector<csv::Row> summary{{"rank", "feature", "mean_abs_phi"}};
  std::vector<std::string> categories;
  svg::BarGroup bars{"mean |phi|", {}};
  for (std::size_t r = 0; r < order.size(); ++r) {
    summary.push_back({std::to_string(r + 1), std::string(names[order[r]]), csv::format_double(mean_abs[order[r]])});
    categories.emplace_back(names[order[r]]);
    bars.values.push_back(mean_abs[order[r]]);
  }

  ctx.write("features.csv", analysis::features_csv(data.test));
  ctx.write("shapley.csv", csv::to_string(rows));
  ctx.write("shapley_summary.csv", csv::to_string(summary));
  ctx.write("shapley_summary.svg", svg::grouped_bars("Mean |Shapley value| per feature", categories, {bars}));
  ctx.write("metrics.csv",
            metrics_csv({{"train_accuracy", analysis::accuracy(model, train_rows, detector::labels_of(data.train))},
                         {"test_accuracy", analysis::accuracy(model, test_rows, detector::labels_of(data.test))},
                         {"instances", static_cast<double>(explained)}}));
  ctx.finish();
}

inline void run_crossdomain(RunContext& ctx) {
  const auto& c = ctx.config();
  const auto seed = master_seed(c);
  const auto texts = corpus::read_jsonl(c.required("paths.data"));
  std::vector<std::string> all;
  for (const auto& t : texts) {
    all.push_back(t.source);
    all.push_back(t.target);
  }
  if (all.empty()) throw DataError("crossdomain: corpus is empty");
  const auto vocab = std::make_shared<const corpus::Vocab>(
      corpus::build_vocab(all, c.count("corpus.min_count"), c.count("corpus.max_vocab"), ctx.diag()));
  const auto examples = corpus::tokenize_examples(texts, *vocab, c.count("corpus.max_len"), ctx.diag());

  std::vector<corpus::DomainTag> domains;
  for (const auto& d : c.list("crossdomain.domains")) domains.push_back(corpus::DomainTag::parse(d));
  if (domains.size() < 2) throw ConfigError("crossdomain.domains needs at least two domains");
  std::vector<LabeledExample> human;
  std::vector<std::vector<LabeledExample>> pools(domains.size());
  for (const auto& e : examples) {
    if (e.label == corpus::Label::human) human.push_back(e);
    for (std::size_t d = 0; d < domains.size(); ++d) {
      if (e.label == corpus::Label::bot && domains[d] == e.domain) pools[d].push_back(e);
    }
  }
  for (std::size_t d = 0; d < domains.size(); ++d) {
    if (pools[d].size() < analysis::kMinDomainExamples) {
      warn(ctx.diag(), "domain " + domains[d].name() + " has " + std::to_string(pools[d].size()) +
                           " examples; its cells are invalid");
    }
  }

  analysis::Trainer trainer;
  const std::string kind = c.str("crossdomain.trainer");
  if (kind == "feature") {
    analysis::LogisticConfig lc;
    lc.l2 = c.real("explain.l2");
    trainer = analysis::feature_trainer(lc);
  } else if (kind == "detector") {
    trainer = analysis::detector_trainer(vocab, detector_config(c),
                                         detector_train_config(c, c.count("crossdomain.detector_steps"), 0));
  } else {
    throw ConfigError("crossdomain.trainer must be feature or detector");
  }
  analysis::CrossDomainConfig cc;
  cc.train_fraction = c.real("crossdomain.train_fraction");
  if (!(cc.train_fraction > 0.0 && cc.train_fraction < 1.0)) {
    throw ConfigError("crossdomain.train_fraction must be in (0, 1)");
  }
  cc.seed = derive_seed(seed, "crossdomain");
  const auto m = analysis::cross_domain_eval(domains, trainer, human, pools, cc);
  ctx.write("matrix.csv", analysis::matrix_csv(m));
  ctx.write("matrix.svg", analysis::matrix_svg(m));
  ctx.finish();
}

inline void run_validate_data(RunContext& ctx) {
  const auto& c = ctx.config();
  std::vector<corpus::IngestSource> sources;
  for (const auto& item : c.list("validate.sources")) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("validate.sources entry '" + item + "' is not domain=path");
    sources.push_back({corpus::DomainTag::parse(trim(item.substr(0, eq))), trim(item.substr(eq + 1))});
  }
  if (sources.empty()) throw ConfigError("missing required config key: validate.sources");
  corpus::CsvColumns cols;
  cols.tweet_id = c.str("validate.id_column");
  cols.text = c.str("validate.text_column");
  cols.reply_to = c.str("validate.reply_column");
  const auto ingested = corpus::ingest_csv(sources, cols);
  const std::string expected_key = c.str("validate.expected");
  const auto expected = expected_key == "cresci2017"
                            ? corpus::cresci2017_expected_manifest()
                            : corpus::manifest_from_json(diff::read_json_file(expected_key));
  // Only domains that were ingested are compared; bot_combined joins when any bot domain is present.
  corpus::CorpusManifest expected_subset;
  for (const auto& [name, counts] : expected.domains) {
    if (ingested.manifest.domains.count(name)) expected_subset.domains[name] = counts;
  }
  const auto report = corpus::validate_manifest(ingested.manifest, expected_subset);
  if (ingested.skipped_replies) {
    warn(ctx.diag(), std::to_string(ingested.skipped_replies) + " replies point at tweets not in the data");
  }

  auto vj = corpus::to_json(report);
  vj["skipped_replies"] = ingested.skipped_replies;
  ctx.write("corpus_manifest.json", corpus::to_json(ingested.manifest).dump(2) + "\n");
  ctx.write("validation.json", vj.dump(2) + "\n");
  ctx.write("pairs.jsonl", corpus::to_jsonl(ingested.examples));
  ctx.finish();
  if (!report.pass) {
    std::string msg = "manifest validation failed:";
    for (const auto& e : report.entries) {
      if (!e.pass) {
        msg += " " + e.domain + " (tweets " + std::to_string(e.tweet_delta) + ", conversations " +
               std::to_string(e.conversation_delta) + ")";
      }
    }
    throw DataError(msg);
  }
}

struct RunFlags {
  bool force = false;
  bool cold_start = false;
  bool retrain = false;
};

inline void run_scenario(const std::string& scenario, const Config& cfg, const fs::path& out, const RunFlags& flags) {
  RunContext ctx(scenario, cfg, out, flags.force);
  if (scenario == "synth") {
    run_synth(ctx);
  } else if (scenario == "pretrain-bot") {
    run_pretrain_bot(ctx);
  } else if (scenario == "pretrain-detector") {
    run_pretrain_detector(ctx);
  } else if (scenario == "adversarial") {
    run_adversarial(ctx, flags.cold_start);
  } else if (scenario == "poison") {
    run_poison(ctx, flags.retrain);
  } else if (scenario == "explain") {
    run_explain(ctx);
  } else if (scenario == "crossdomain") {
    run_crossdomain(ctx);
  } else if (scenario == "validate-data") {
    run_validate_data(ctx);
  } else {
    throw ConfigError("unknown scenario: " + scenario);
  }
}

}  // namespace advbot::cli
