#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "advbot/cli/config.hpp"
#include "support/cresci_fixture.hpp"

namespace fs = std::filesystem;
using advbot::cli::Config;

namespace {

const char* kTinyConfig = R"(# tiny sizes for fast runs
[run]
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

struct Result {
  int code;
  std::string err;
};

Result cli(const fs::path& work, const std::string& args) {
  const fs::path err = work / "stderr.txt";
  const std::string cmd = std::string("\"") + ADVBOT_CLI_PATH + "\" " + args + " >/dev/null 2>\"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(err)};
}

fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("advbot_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const auto p = dir / "run.ini";
  std::ofstream(p) << text;
  return p;
}

// Artifacts whose bytes must be reproducible (everything but the run records,
// which name paths and thread counts).
std::map<std::string, std::string> artifacts(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    const auto name = e.path().filename().string();
    if (name == "resolved.config" || name == "manifest.json" || name == "stderr.txt" || name == "run.ini") continue;
    out[fs::relative(e.path(), root).string()] = slurp(e.path());
  }
  return out;
}

// Every scenario at tiny sizes, chained through checkpoints.
void full_pipeline(const fs::path& root, const std::string& cfg, const std::string& fixture_sources, int threads) {
  const std::string common = "--config \"" + cfg + "\" --threads " + std::to_string(threads) + " ";
  bool failed = false;
  auto ok = [&](const std::string& args) {
    if (failed) return;
    const auto r = cli(root, args);
    failed = r.code != 0;
    ASSERT_EQ(r.code, 0) << args << "\n" << r.err;
  };
  const auto p = [&](const std::string& s) { return "\"" + (root / s).string() + "\""; };
  ok("synth " + common + "--out " + p("synth"));
  const std::string data = "--data " + p("synth/corpus.jsonl") + " ";
  ok("pretrain-bot " + common + data + "--out " + p("bot"));
  const std::string gen = "--generator " + p("bot/generator.ckpt.json") + " ";
  ok("pretrain-detector " + common + data + gen + "--out " + p("det"));
  const std::string det = "--detector " + p("det/detector.ckpt.json") + " ";
  ok("adversarial " + common + data + gen + det + "--out " + p("adv"));
  ok("poison " + common + data + det + "--out " + p("poison_pinched"));
  ok("poison " + common + data + det + "--generator " + p("adv/generator_adversarial.ckpt.json") +
     " --poison.mode=generated --retrain --out " + p("poison_generated"));
  ok("explain " + common + data + "--out " + p("explain"));
  ok("crossdomain " + common + data + "--out " + p("cross_feature"));
  ok("crossdomain " + common + data + "--crossdomain.trainer detector --out " + p("cross_detector"));
  ok("validate-data " + common + "--validate.sources=" + fixture_sources + " --out " + p("validate"));
}

}  // namespace

TEST(CliConfig, MinimalSynthConfigFillsDefaults) {
  Config c;
  c.apply(Config::parse_text("[synth]\npairs_per_style = 5\n", "mem"));
  EXPECT_EQ(c.count("synth.pairs_per_style"), 5u);
  EXPECT_EQ(c.count("generator.embed_dim"), 25u);
  EXPECT_EQ(c.count("generator.batch_size"), 64u);
  EXPECT_EQ(c.count("generator.hidden_dim"), 32u);
  EXPECT_EQ(c.count("game.n_roll"), 16u);
  EXPECT_EQ(c.count("game.batch_size"), 64u);
  EXPECT_NE(c.resolved_text().find("[generator]\n"), std::string::npos);
}

TEST(CliConfig, UnknownKeysAreNamed) {
  Config c;
  try {
    c.apply(Config::parse_text("foo = 1\n[run]\nbar = 2\n", "mem"));
    FAIL();
  } catch (const advbot::ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("foo"), std::string::npos);
    EXPECT_NE(msg.find("run.bar"), std::string::npos);
  }
  EXPECT_THROW(Config::parse_text("[run\n", "mem"), advbot::ConfigError);
  EXPECT_THROW(c.integer("generator.optimizer"), advbot::ConfigError);
  EXPECT_THROW(c.required("paths.data"), advbot::ConfigError);
}

TEST(CliRun, SeedFlagOverridesFile) {
  const auto dir = fresh_dir("seed");
  const auto cfg = write_config(dir, "[run]\nseed = 1\n[synth]\npairs_per_style = 3\n");
  const auto r = cli(dir, "synth --config \"" + cfg.string() + "\" --seed=5 --out \"" + (dir / "o").string() + "\"");
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string resolved = slurp(dir / "o" / "resolved.config");
  EXPECT_NE(resolved.find("seed = 5\n"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "o" / "manifest.json"));
  // --section.key overrides sit below explicit flags.
  const auto r2 = cli(dir, "synth --config \"" + cfg.string() + "\" --run.seed 7 --out \"" + (dir / "o2").string() + "\"");
  ASSERT_EQ(r2.code, 0) << r2.err;
  EXPECT_NE(slurp(dir / "o2" / "resolved.config").find("seed = 7\n"), std::string::npos);
}

TEST(CliRun, UnknownKeyExitsWithConfigError) {
  const auto dir = fresh_dir("unknown");
  const auto cfg = write_config(dir, "foo = 1\n");
  const auto r = cli(dir, "synth --config \"" + cfg.string() + "\" --out \"" + (dir / "o").string() + "\"");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("foo"), std::string::npos);
  EXPECT_EQ(cli(dir, "synth --nonsense --out x").code, 2);
  EXPECT_EQ(cli(dir, "no-such-scenario").code, 2);
  EXPECT_EQ(cli(dir, "--help").code, 0);
}

TEST(CliRun, SynthThenPretrainWritesCheckpoint) {
  const auto dir = fresh_dir("pretrain");
  const auto cfg = write_config(dir, kTinyConfig).string();
  ASSERT_EQ(cli(dir, "synth -c \"" + cfg + "\" -o \"" + (dir / "s").string() + "\"").code, 0);
  const auto r = cli(dir, "pretrain-bot -c \"" + cfg + "\" --data \"" + (dir / "s" / "corpus.jsonl").string() +
                              "\" -o \"" + (dir / "b").string() + "\"");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "b" / "generator.ckpt.json"));
  EXPECT_TRUE(fs::exists(dir / "b" / "mle_trace.csv"));
  // Refuses to overwrite without --force.
  const auto again = cli(dir, "synth -c \"" + cfg + "\" -o \"" + (dir / "s").string() + "\"");
  EXPECT_EQ(again.code, 2);
  EXPECT_EQ(cli(dir, "synth -c \"" + cfg + "\" --force -o \"" + (dir / "s").string() + "\"").code, 0);
}

TEST(CliRun, AdversarialWithoutCheckpointsAsksForPretraining) {
  const auto dir = fresh_dir("adv");
  const auto cfg = write_config(dir, kTinyConfig).string();
  ASSERT_EQ(cli(dir, "synth -c \"" + cfg + "\" -o \"" + (dir / "s").string() + "\"").code, 0);
  const std::string data = " --data \"" + (dir / "s" / "corpus.jsonl").string() + "\"";
  const auto r = cli(dir, "adversarial -c \"" + cfg + "\"" + data + " -o \"" + (dir / "a").string() + "\"");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("pretrain-bot"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("--cold-start"), std::string::npos) << r.err;
  const auto cold =
      cli(dir, "adversarial -c \"" + cfg + "\"" + data + " --cold-start -o \"" + (dir / "c").string() + "\"");
  EXPECT_EQ(cold.code, 0) << cold.err;
  EXPECT_TRUE(fs::exists(dir / "c" / "trace.csv"));
}

TEST(CliRun, ValidateDataPassesOnCresciShapedFixture) {
  const auto dir = fresh_dir("validate");
  std::string sources;
  for (const auto& s : advbot::testing::write_cresci_fixture(dir / "csv")) sources += (sources.empty() ? "" : ",") + s;
  const auto r = cli(dir, "validate-data --validate.sources=\"" + sources + "\" -o \"" + (dir / "v").string() + "\"");
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string report = slurp(dir / "v" / "validation.json");
  EXPECT_NE(report.find("\"pass\": true"), std::string::npos) << report;
  EXPECT_TRUE(fs::exists(dir / "v" / "pairs.jsonl"));

  // Expecting a count the data does not have fails with a data error.
  const auto manifest = dir / "expected.json";
  std::ofstream(manifest) << R"({"domains": {"human": {"tweets": 1, "conversations": 1}}})";
  const auto bad = cli(dir, "validate-data --validate.sources=\"" + sources + "\" --validate.expected=\"" +
                                manifest.string() + "\" -o \"" + (dir / "bad").string() + "\"");
  EXPECT_EQ(bad.code, 3) << bad.err;
}

TEST(CliRun, EveryScenarioIsByteReproducibleAcrossThreadCounts) {
  const auto dir = fresh_dir("repro");
  const auto cfg = write_config(dir, kTinyConfig).string();
  std::string sources;
  for (const auto& s : advbot::testing::write_cresci_fixture(dir / "csv")) sources += (sources.empty() ? "" : ",") + s;
  sources = "\"" + sources + "\"";
  fs::create_directories(dir / "a");
  fs::create_directories(dir / "b");
  full_pipeline(dir / "a", cfg, sources, 1);
  if (HasFatalFailure()) return;
  full_pipeline(dir / "b", cfg, sources, 3);
  if (HasFatalFailure()) return;
  const auto a = artifacts(dir / "a");
  const auto b = artifacts(dir / "b");
  ASSERT_EQ(a.size(), b.size());
  std::size_t csvs = 0;
  for (const auto& [name, bytes] : a) {
    ASSERT_TRUE(b.count(name)) << name;
    EXPECT_TRUE(bytes == b.at(name)) << name << " differs";
    csvs += name.size() > 4 && name.substr(name.size() - 4) == ".csv";
  }
  EXPECT_GE(csvs, 15u);
}
