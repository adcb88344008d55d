// advbot: command-line front end for the scenario runners.

#include <cstdlib>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "advbot/cli/config.hpp"
#include "advbot/cli/scenarios.hpp"
#include "advbot/common/error.hpp"

namespace {

struct Options {
  std::string config_file;
  std::string out;
  std::vector<std::string> sets;
  std::string seed, threads, data, generator, detector;
  advbot::cli::RunFlags flags;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config,-c", o.config_file, "config file (INI sections, key = value)");
  sub->add_option("--out,-o", o.out, "output directory (default: $ADVBOT_OUT_ROOT/<scenario>)");
  sub->add_option("--set", o.sets, "override, section.key=value (repeatable)");
  sub->add_option("--seed", o.seed, "run.seed");
  sub->add_option("--threads", o.threads, "run.threads");
  sub->add_option("--data", o.data, "paths.data");
  sub->add_option("--generator", o.generator, "paths.generator");
  sub->add_option("--detector", o.detector, "paths.detector");
  sub->add_flag("--force", o.flags.force, "allow a non-empty output directory");
  sub->allow_extras();
}

// Leftover arguments must be --section.key=value or --section.key value.
std::vector<std::string> dotted_overrides(const std::vector<std::string>& extras) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& a = extras[i];
    if (a.rfind("--", 0) != 0 || a.find('.') == std::string::npos) {
      throw advbot::ConfigError("unrecognized argument: " + a);
    }
    std::string body = a.substr(2);
    if (body.find('=') == std::string::npos) {
      if (i + 1 >= extras.size()) throw advbot::ConfigError("missing value for " + a);
      body += "=" + extras[++i];
    }
    out.push_back(body);
  }
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"Adversarial bot / bot-detector workbench"};
  app.require_subcommand(1);
  Options o;
  for (const auto& name : advbot::cli::scenario_names()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " scenario");
    add_common(sub, o);
    if (name == "adversarial") sub->add_flag("--cold-start", o.flags.cold_start, "allow untrained models");
    if (name == "poison") sub->add_flag("--retrain", o.flags.retrain, "also train a detector on poisoned data");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  CLI::App* sub = app.get_subcommands().front();
  const std::string scenario = sub->get_name();

  advbot::cli::Config cfg;
  if (!o.config_file.empty()) cfg.load_file(o.config_file);
  for (const auto& s : o.sets) cfg.apply_override(s);
  for (const auto& s : dotted_overrides(sub->remaining())) cfg.apply_override(s);
  if (!o.seed.empty()) cfg.set("run.seed", o.seed);
  if (!o.threads.empty()) cfg.set("run.threads", o.threads);
  if (!o.data.empty()) cfg.set("paths.data", o.data);
  if (!o.generator.empty()) cfg.set("paths.generator", o.generator);
  if (!o.detector.empty()) cfg.set("paths.detector", o.detector);

  std::string out = o.out;
  if (out.empty()) {
    const char* root = std::getenv("ADVBOT_OUT_ROOT");
    out = (std::filesystem::path(root && *root ? root : "runs") / scenario).string();
  }
  advbot::cli::run_scenario(scenario, cfg, out, o.flags);
  std::cout << scenario << ": artifacts written to " << out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const advbot::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const advbot::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const advbot::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
