// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "advbot/adversarial/game.hpp"
#include "advbot/adversarial/rollout.hpp"
#include "advbot/analysis/auc.hpp"
#include "advbot/analysis/crossdomain.hpp"
#include "advbot/analysis/logistic.hpp"
#include "advbot/analysis/shapley.hpp"
#include "advbot/analysis/stats.hpp"
#include "advbot/cli/scenarios.hpp"
#include "advbot/corpus/conversations.hpp"
#include "advbot/corpus/manifest.hpp"
#include "advbot/corpus/split.hpp"
#include "advbot/corpus/synthetic.hpp"
#include "advbot/diffcore/gradcheck.hpp"
#include "advbot/poisoning/poison.hpp"
#include "support/cresci_fixture.hpp"
#include "support/fixtures.hpp"

using namespace advbot;
using corpus::ConversationPair;
using corpus::DomainTag;
using corpus::Label;
using corpus::LabeledExample;
using corpus::TokenSeq;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(4);
  ss << v;
  return ss.str();
}

// --- shared synthetic corpus -------------------------------------------------------------------

struct Synthetic {
  std::shared_ptr<const corpus::Vocab> vocab;
  std::vector<LabeledExample> human, bot;
  std::map<std::string, std::vector<LabeledExample>> by_domain;
};

const Synthetic& synthetic() {
  static const Synthetic s = [] {
    std::vector<corpus::SyntheticStyle> styles;
    for (auto k : {DomainTag::Kind::human, DomainTag::Kind::bot_political, DomainTag::Kind::bot_financial,
                   DomainTag::Kind::bot_commercial}) {
      styles.push_back(corpus::builtin_style(k));
    }
    const auto texts = corpus::generate_synthetic_corpus(styles, 400, 7);
    std::vector<std::string> all;
    for (const auto& t : texts) {
      all.push_back(t.source);
      all.push_back(t.target);
    }
    Synthetic out;
    out.vocab = std::make_shared<const corpus::Vocab>(corpus::build_vocab(all, 1, 5000));
    for (auto& e : corpus::tokenize_examples(texts, *out.vocab)) {
      (e.label == Label::human ? out.human : out.bot).push_back(e);
      out.by_domain[e.domain.name()].push_back(e);
    }
    return out;
  }();
  return s;
}

std::vector<ConversationPair> pairs_of(const std::vector<LabeledExample>& xs, std::size_t lo, std::size_t hi) {
  std::vector<ConversationPair> out;
  for (std::size_t i = lo; i < std::min(hi, xs.size()); ++i) out.push_back(xs[i].pair);
  return out;
}

// --- 1 ----------------------------------------------------------------------------------------

// A step of 1e-5 leaves about eps*|f|/h ~ 1e-10 of rounding in each difference quotient, so the
// relative error is taken against max(|a|, |n|, 1e-5).
constexpr double kFdStep = 1e-5;
constexpr double kFdFloor = 1e-5;

Outcome gradient_check() {
  const auto v = advbot::testing::small_vocab(4);
  double worst_gen = 0, worst_det = 0, worst_pg = 0;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    Rng rng(seed);
    generator::GeneratorConfig gc;
    gc.embed_dim = 5;
    gc.hidden_dim = 4;
    gc.max_len = 8;
    gc.init_scale = 0.3;
    generator::GeneratorModel g(v, gc, seed);
    const auto pair = advbot::testing::random_pair(rng, *v, 2, 3);
    worst_gen = std::max(worst_gen, diff::finite_difference_check([&](diff::Tape& t) { return generator::sequence_nll(t, g, pair); },
                                                                  g.parameters(), kFdStep, kFdFloor)
                                        .max_rel_error);

    detector::DetectorConfig dc;
    dc.embed_dim = 4;
    dc.hidden_dim = 5;
    dc.init_scale = 0.4;
    detector::DetectorModel d(v, dc, seed + 10);
    std::vector<LabeledExample> batch;
    for (int i = 0; i < 4; ++i) {
      batch.push_back(detector::as_example(advbot::testing::random_pair(rng, *v), i % 2 ? Label::human : Label::bot));
    }
    worst_det = std::max(worst_det, diff::finite_difference_check([&](diff::Tape& t) { return detector::detector_loss(t, d, batch); },
                                                                  d.parameters(), kFdStep, kFdFloor)
                                        .max_rel_error);

    const auto src = advbot::testing::random_seq(rng, *v, 1, 3);
    const auto resp = advbot::testing::random_seq(rng, *v, 3, 3);
    std::vector<double> rewards;
    for (std::size_t i = 0; i < resp.size(); ++i) rewards.push_back(rng.uniform());
    worst_pg = std::max(worst_pg, diff::finite_difference_check(
                                      [&](diff::Tape& t) { return generator::policy_surrogate(t, g, src, resp, rewards, 0.3); },
                                      g.parameters(), kFdStep, kFdFloor)
                                      .max_rel_error);
  }
  const bool ok = worst_gen < 1e-4 && worst_det < 1e-4 && worst_pg < 1e-4;
  return {ok, "max rel err mle=" + fmt(worst_gen) + " detector=" + fmt(worst_det) + " surrogate=" + fmt(worst_pg)};
}

// --- 2 ----------------------------------------------------------------------------------------

Outcome factorization() {
  Rng rng(21);
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    const auto v = advbot::testing::small_vocab(3 + rng.below(8));
    generator::GeneratorConfig gc;
    gc.embed_dim = 2 + rng.below(5);
    gc.hidden_dim = 2 + rng.below(6);
    gc.max_len = 8;
    gc.init_scale = 0.2 + rng.uniform();
    const generator::GeneratorModel m(v, gc, rng.next());
    const auto pair = advbot::testing::random_pair(rng, *v, 1, 6);
    auto s = generator::encode(m, pair.source);
    corpus::TokenId prev = corpus::kBos;
    double lp = 0.0;
    for (std::size_t t = 0; t <= pair.target.size(); ++t) {
      const corpus::TokenId y = t < pair.target.size() ? pair.target[t] : corpus::kEos;
      const auto out = generator::step_distribution(m, s, prev);
      lp += std::log(out.probs[static_cast<std::size_t>(y)]);
      s = out.state;
      prev = y;
    }
    worst = std::max(worst, std::abs(generator::sequence_log_prob(m, pair) - lp));
  }
  return {worst <= 1e-12, "max |diff| over 100 instances=" + fmt(worst)};
}

// --- 3 ----------------------------------------------------------------------------------------

Outcome rollout_unbiased() {
  Rng rng(31);
  const auto v = advbot::testing::small_vocab(3);
  int within = 0;
  for (int i = 0; i < 100; ++i) {
    generator::GeneratorConfig gc;
    gc.embed_dim = 4;
    gc.hidden_dim = 5;
    gc.max_len = 2;
    gc.init_scale = 0.5 + rng.uniform();
    detector::DetectorConfig dc;
    dc.embed_dim = 4;
    dc.hidden_dim = 5;
    dc.init_scale = 0.5 + rng.uniform();
    const generator::GeneratorModel bot(v, gc, rng.next());
    const detector::DetectorModel det(v, dc, rng.next());
    const auto src = advbot::testing::random_seq(rng, *v, 1, 3);
    const TokenSeq prefix{{static_cast<corpus::TokenId>(corpus::kNumReserved + rng.below(3))}};
    generator::DecodingConfig dec;
    dec.max_len = 2;
    const double exact = adversarial::exact_reward_oracle(bot, det, src, prefix, dec);
    const auto mc = adversarial::rollout_reward(bot, det, src, prefix, 10000, rng.next(), dec);
    if (std::abs(mc.mean - exact) <= 3.0 * mc.standard_error) ++within;
  }
  return {within >= 95, std::to_string(within) + "/100 within 3 SE"};
}

// --- 4, 5 -------------------------------------------------------------------------------------

struct GameRun {
  std::vector<double> cosine, perplexity, loss;
};

const GameRun& game_run() {
  static const GameRun run = [] {
    const auto& s = synthetic();
    adversarial::GameData data;
    data.real = pairs_of(s.human, 0, 320);
    data.heldout = pairs_of(s.human, 320, s.human.size());
    generator::GeneratorModel bot(s.vocab, {}, 1);
    generator::MleConfig mc;
    mc.epochs = 3;
    mc.batch_size = 32;
    mc.optimizer = diff::OptimizerConfig::adam(5e-3);
    mc.seed = 2;
    generator::pretrain_mle(bot, pairs_of(s.bot, 0, s.bot.size()), mc);
    detector::DetectorModel det(s.vocab, {}, 3);
    detector::DetectorTrainConfig dc;
    dc.steps = 20;
    dc.batch_size = 32;
    dc.seed = 4;
    dc.optimizer = diff::OptimizerConfig::adam(1e-3);
    detector::pretrain_detector(det, data.real, &bot, dc);
    adversarial::GameConfig gc;
    gc.iterations = 50;
    gc.batch_size = 16;
    gc.n_roll = 4;
    gc.seed = 5;
    gc.bot_optimizer = diff::OptimizerConfig::adam(1e-3);
    gc.detector_optimizer = diff::OptimizerConfig::adam(1e-3);
    gc.metric_samples = 64;
    const auto trace = adversarial::run_game(bot, det, data, gc);
    GameRun r;
    for (const auto& rec : trace.records) {
      r.cosine.push_back(rec.cosine_sim);
      r.perplexity.push_back(rec.perplexity);
      r.loss.push_back(rec.detector_loss);
    }
    return r;
  }();
  return run;
}

Outcome game_trend() {
  const auto& r = game_run();
  const double c = analysis::trend(r.cosine), p = analysis::trend(r.perplexity);
  return {r.cosine.size() == 50 && c > 0.5 && p < -0.5,
          "spearman cosine=" + fmt(c) + " perplexity=" + fmt(p) + " over " + std::to_string(r.cosine.size()) + " iterations"};
}

Outcome detector_loss_trend() {
  const auto& r = game_run();
  const std::vector<double> first(r.loss.begin(), r.loss.begin() + std::min<std::size_t>(30, r.loss.size()));
  const double l = analysis::trend(first);
  return {first.size() == 30 && l < -0.5, "spearman detector loss (first 30)=" + fmt(l)};
}

// --- 6 ----------------------------------------------------------------------------------------

Outcome detector_sanity() {
  const auto& s = synthetic();
  const auto htrain = pairs_of(s.human, 0, 320), htest = pairs_of(s.human, 320, s.human.size());
  const generator::GeneratorModel noise(s.vocab, {}, 11);
  detector::DetectorTrainConfig dc;
  dc.steps = 200;
  dc.batch_size = 32;
  dc.seed = 13;
  detector::DetectorModel det(s.vocab, {}, 12);
  detector::pretrain_detector(det, htrain, &noise, dc);
  std::vector<LabeledExample> test;
  for (std::size_t i = 0; i < htest.size(); ++i) {
    test.push_back(detector::as_example(htest[i], Label::human));
    test.push_back(detector::as_example(detector::generated_pair(noise, htest[i].source, {}, 1000 + i), Label::bot));
  }
  const auto ev = detector::evaluate(det, test);

  std::vector<LabeledExample> shuffled;
  for (std::size_t i = 0; i < htrain.size(); ++i) {
    shuffled.push_back(detector::as_example(htrain[i], Label::human));
    shuffled.push_back(detector::as_example(detector::generated_pair(noise, htrain[i].source, {}, 5000 + i), Label::bot));
  }
  std::vector<Label> labels;
  for (const auto& e : shuffled) labels.push_back(e.label);
  Rng rng(3);
  rng.shuffle(labels);
  for (std::size_t i = 0; i < shuffled.size(); ++i) shuffled[i].label = labels[i];
  detector::DetectorModel control(s.vocab, {}, 14);
  detector::train_detector(control, shuffled, dc);
  const auto ec = detector::evaluate(control, test);

  const double auc = ev.auc.value_or(0.0);
  const bool ok = ev.accuracy > 0.9 && auc > 0.95 && ec.accuracy >= 0.4 && ec.accuracy <= 0.6;
  return {ok, "accuracy=" + fmt(ev.accuracy) + " auc=" + fmt(auc) + " shuffled accuracy=" + fmt(ec.accuracy)};
}

// --- 7 ----------------------------------------------------------------------------------------

Outcome poisoning_premise() {
  const auto& s = synthetic();
  const auto hs = corpus::split_dataset(s.human, {0.5, 0.5}, 1);
  const std::vector<LabeledExample> pool(hs.train.begin(), hs.train.begin() + 100);
  std::vector<LabeledExample> train(hs.train.begin() + 100, hs.train.end());
  const auto bs = corpus::split_dataset(s.bot, {0.7, 0.3}, 2);
  train.insert(train.end(), bs.train.begin(), bs.train.end());
  detector::DetectorTrainConfig dc;
  dc.steps = 400;
  dc.batch_size = 32;
  dc.seed = 13;
  detector::DetectorModel det(s.vocab, {}, 15);
  detector::train_detector(det, train, dc);
  std::vector<LabeledExample> base = hs.test;
  base.insert(base.end(), bs.test.begin(), bs.test.end());
  const auto attacks = poisoning::select_pinched_examples(det, pool, std::max<std::size_t>(10, bs.test.size() / 10),
                                                          poisoning::SelectionRule::lowest_detection_prob, 1);
  poisoning::PoisonConfig pc;
  pc.fraction = 0.1;
  const auto poisoned = poisoning::poison_dataset(base, attacks, pc);
  const auto sum = poisoning::evaluate_under_poisoning(det, poisoned);
  const double gap = sum.gap.value_or(-1.0), tv = sum.tv_attack_human.value_or(1.0);
  return {gap > 0.2 && tv < 0.15, "gap=" + fmt(gap) + " tv(attack,human)=" + fmt(tv)};
}

// --- 8 ----------------------------------------------------------------------------------------

Outcome shapley() {
  using analysis::kNumFeatures;
  Rng rng(81);
  double linear_err = 0, efficiency_err = 0;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> w(kNumFeatures), x(kNumFeatures);
    const double b = rng.normal();
    for (auto& v : w) v = rng.normal();
    for (auto& v : x) v = rng.normal() * 3;
    std::vector<std::vector<double>> bg(7, std::vector<double>(kNumFeatures));
    for (auto& r : bg) {
      for (auto& v : r) v = rng.normal();
    }
    auto f = [&](std::span<const double> z) {
      double acc = b;
      for (std::size_t i = 0; i < z.size(); ++i) acc += w[i] * z[i];
      return acc;
    };
    const auto mean = analysis::column_means(bg);
    const auto e = analysis::exact_shapley(f, x, bg);
    double total = 0;
    for (std::size_t i = 0; i < kNumFeatures; ++i) {
      linear_err = std::max(linear_err, std::abs(e.phi[i] - w[i] * (x[i] - mean[i])));
      total += e.phi[i];
    }
    efficiency_err = std::max(efficiency_err, std::abs(total - (e.prediction - e.base_value)));
  }

  int instances_ok = 0;
  for (int instance = 0; instance < 20; ++instance) {
    std::vector<double> w(kNumFeatures), x(kNumFeatures), mu(kNumFeatures), sd(kNumFeatures, 1.0);
    for (auto& v : w) v = rng.normal();
    for (auto& v : x) v = rng.normal() * 2;
    const analysis::LogisticModel model(mu, sd, w, rng.normal());
    auto f = [&](std::span<const double> z) { return model.probability(z); };
    std::vector<std::vector<double>> bg(5, std::vector<double>(kNumFeatures));
    for (auto& r : bg) {
      for (auto& v : r) v = rng.normal();
    }
    const auto exact = analysis::exact_shapley(f, x, bg);
    const auto sampled = analysis::sampled_shapley(f, x, bg, 2000, static_cast<std::uint64_t>(instance));
    bool ok = true;
    double te = 0, ts = 0;
    for (std::size_t i = 0; i < kNumFeatures; ++i) {
      if (std::abs(sampled.phi[i] - exact.phi[i]) > 3.0 * sampled.se[i] + 1e-12) ok = false;
      te += exact.phi[i];
      ts += sampled.phi[i];
    }
    efficiency_err = std::max({efficiency_err, std::abs(te - (exact.prediction - exact.base_value)),
                               std::abs(ts - (sampled.prediction - sampled.base_value))});
    if (ok) ++instances_ok;
  }
  const bool ok = linear_err <= 1e-9 && efficiency_err <= 1e-9 && instances_ok == 20;
  return {ok, "linear max err=" + fmt(linear_err) + " sampled within 3 SE on " + std::to_string(instances_ok) +
                  "/20 instances, efficiency max err=" + fmt(efficiency_err)};
}

// --- 9 ----------------------------------------------------------------------------------------

Outcome auc_equivalence() {
  Rng rng(91);
  int checked = 0, mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(50);
    std::vector<double> s;
    std::vector<int> y;
    for (std::size_t i = 0; i < n; ++i) {
      s.push_back(trial % 2 ? std::round(rng.uniform() * 8) / 8 : rng.uniform());
      y.push_back(static_cast<int>(rng.below(2)));
    }
    double wins = 0, pairs = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (y[i] == 1 && y[j] == 0) {
          wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
          pairs += 1;
        }
      }
    }
    const auto a = analysis::auc_roc(s, y);
    if (pairs == 0) {
      if (a.has_value()) ++mismatches;
      continue;
    }
    ++checked;
    if (!a || *a != wins / pairs) ++mismatches;
  }
  const auto worked = analysis::auc_roc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, std::vector<int>{0, 0, 1, 1});
  const bool ok = mismatches == 0 && worked && *worked == 0.75;
  return {ok, std::to_string(mismatches) + " mismatches over " + std::to_string(checked) +
                  " two-class sets, worked example=" + (worked ? fmt(*worked) : std::string("none"))};
}

// --- 10 ---------------------------------------------------------------------------------------

Outcome cross_domain() {
  const auto& s = synthetic();
  const auto& pol = s.by_domain.at("bot_political");
  const auto& fin = s.by_domain.at("bot_financial");
  const auto& com = s.by_domain.at("bot_commercial");
  const analysis::CrossDomainConfig cfg{0.8, 21};
  const auto m = analysis::cross_domain_eval(
      {DomainTag::Kind::bot_political, DomainTag::Kind::bot_financial, DomainTag::Kind::bot_commercial},
      analysis::feature_trainer(), s.human, {pol, fin, com}, cfg);
  bool diag_ok = true;
  double worst_margin = 1.0;
  for (std::size_t i = 0; i < 3; ++i) {
    double off = 0;
    for (std::size_t j = 0; j < 3; ++j) {
      if (j != i) off += m.cells[i][j].accuracy / 2.0;
    }
    worst_margin = std::min(worst_margin, m.cells[i][i].accuracy - off);
    if (!(m.cells[i][i].accuracy >= off)) diag_ok = false;
  }

  const auto dup = analysis::cross_domain_eval({DomainTag::Kind::bot_political, DomainTag::custom("duplicate")},
                                               analysis::feature_trainer(), s.human, {pol, pol}, cfg);
  const double dup_diff = std::max(std::abs(dup.cells[0][1].accuracy - dup.cells[0][0].accuracy),
                                   std::abs(dup.cells[1][0].accuracy - dup.cells[1][1].accuracy));

  std::vector<LabeledExample> human_as_bot = s.human;
  for (auto& e : human_as_bot) e.label = Label::bot;
  const auto hb = analysis::cross_domain_eval({DomainTag::custom("human_as_bot"), DomainTag::Kind::bot_political},
                                              analysis::feature_trainer(), s.human, {human_as_bot, pol}, cfg);
  const double hb_acc = hb.cells[0][0].accuracy;

  const bool ok = diag_ok && dup_diff <= 0.05 && std::abs(hb_acc - 0.5) <= 0.1;
  return {ok, "duplicate max |off-diag - diag|=" + fmt(dup_diff) + " human-as-bot accuracy=" + fmt(hb_acc) +
                  " min(diag - row off-diag mean)=" + fmt(worst_margin)};
}

// --- 11 ---------------------------------------------------------------------------------------

const char* kTinyConfig = R"([run]
seed = 3
[corpus]
max_len = 8
[synth]
pairs_per_style = 30
[generator]
embed_dim = 6
hidden_dim = 8
epochs = 1
batch_size = 16
[detector]
embed_dim = 6
hidden_dim = 8
steps = 5
batch_size = 8
[game]
iterations = 2
n_roll = 2
batch_size = 4
metric_samples = 4
[poison]
train_steps = 5
[explain]
instances = 2
[crossdomain]
detector_steps = 5
)";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Every scenario, in dependency order; returns CSV name -> bytes.
std::map<std::string, std::string> pipeline(const fs::path& root, const std::string& sources, int threads) {
  fs::remove_all(root);
  auto base = [&] {
    cli::Config c;
    c.apply(cli::Config::parse_text(kTinyConfig, "acceptance"));
    c.set("run.threads", std::to_string(threads));
    return c;
  };
  const auto at = [&](const std::string& s) { return (root / s).string(); };
  auto run = [&](const std::string& scenario, const std::string& out, cli::Config c, cli::RunFlags flags = {}) {
    cli::run_scenario(scenario, c, root / out, flags);
  };
  run("synth", "synth", base());
  auto with_data = [&] {
    auto c = base();
    c.set("paths.data", at("synth/corpus.jsonl"));
    return c;
  };
  run("pretrain-bot", "bot", with_data());
  auto c = with_data();
  c.set("paths.generator", at("bot/generator.ckpt.json"));
  run("pretrain-detector", "det", c);
  c.set("paths.detector", at("det/detector.ckpt.json"));
  run("adversarial", "adv", c);
  auto p = with_data();
  p.set("paths.detector", at("det/detector.ckpt.json"));
  run("poison", "poison_pinched", p);
  p.set("paths.generator", at("adv/generator_adversarial.ckpt.json"));
  p.set("poison.mode", "generated");
  cli::RunFlags retrain;
  retrain.retrain = true;
  run("poison", "poison_generated", p, retrain);
  run("explain", "explain", with_data());
  run("crossdomain", "cross_feature", with_data());
  auto cd = with_data();
  cd.set("crossdomain.trainer", "detector");
  run("crossdomain", "cross_detector", cd);
  auto v = base();
  v.set("validate.sources", sources);
  run("validate-data", "validate", v);

  std::map<std::string, std::string> csvs;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file() && e.path().extension() == ".csv") csvs[fs::relative(e.path(), root).string()] = slurp(e.path());
  }
  return csvs;
}

Outcome determinism() {
  const auto tmp = fs::temp_directory_path() / "advbot_acceptance_determinism";
  fs::remove_all(tmp);
  std::string sources;
  for (const auto& s : advbot::testing::write_cresci_fixture(tmp / "fixture")) sources += (sources.empty() ? "" : ",") + s;
  const auto a = pipeline(tmp / "a", sources, 1);
  const auto b = pipeline(tmp / "b", sources, 1);
  const auto c = pipeline(tmp / "c", sources, 4);
  fs::remove_all(tmp);
  std::size_t differing = 0;
  for (const auto& [name, bytes] : a) {
    if (!b.count(name) || b.at(name) != bytes) ++differing;
    if (!c.count(name) || c.at(name) != bytes) ++differing;
  }
  const bool ok = !a.empty() && a.size() == b.size() && a.size() == c.size() && differing == 0;
  return {ok, std::to_string(a.size()) + " CSV artifacts, " + std::to_string(differing) +
                  " differences across runs at 1, 1 and 4 threads"};
}

// --- 12 ---------------------------------------------------------------------------------------

Outcome manifest() {
  const auto dir = fs::temp_directory_path() / "advbot_acceptance_fixture";
  fs::remove_all(dir);
  std::vector<corpus::IngestSource> sources;
  for (const auto& s : advbot::testing::write_cresci_fixture(dir)) {
    const auto eq = s.find('=');
    sources.push_back({DomainTag::parse(s.substr(0, eq)), s.substr(eq + 1)});
  }
  const auto r = corpus::ingest_csv(sources, corpus::CsvColumns{});
  fs::remove_all(dir);
  const auto v = corpus::validate_manifest(r.manifest, corpus::cresci2017_expected_manifest());
  return {v.pass, "human tweets=" + std::to_string(r.manifest.domains.at("human").tweets) +
                      " bot_combined conversations=" + std::to_string(r.manifest.domains.at("bot_combined").conversations)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient correctness", gradient_check},
      {"log-prob factorization", factorization},
      {"rollout unbiasedness", rollout_unbiased},
      {"game trend: cosine up, perplexity down", game_trend},
      {"game trend: detector loss down", detector_loss_trend},
      {"detector sanity", detector_sanity},
      {"poisoning premise", poisoning_premise},
      {"shapley correctness", shapley},
      {"auc oracle equivalence", auc_equivalence},
      {"cross-domain controls", cross_domain},
      {"determinism", determinism},
      {"manifest validation", manifest},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("%s %2zu %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str(),
                secs);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
