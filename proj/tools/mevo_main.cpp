// Command-line front end. One JSON experiment configuration drives the whole
// pipeline: `generate` samples modal states and evolves them one lag, `train`
// fits the residual network, `predict` rolls it out, `analyze` evaluates the
// step-error bound, and `verify` runs the numbered acceptance checks.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "mevo/errors.hpp"
#include "mevo/experiment.hpp"
#include "mevo/parallel.hpp"
#include "mevo/verify.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string preset;
  std::string scale = "desk";
  std::string out;
  std::string seed;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("-c,--config", o.config_path, "experiment configuration file (JSON)");
  cmd->add_option("-p,--preset", o.preset, "built-in preset name (e.g. ex1-advection)");
  cmd->add_option("--scale", o.scale, "preset variant: desk or paper")->capture_default_str();
  cmd->add_option("-o,--out", o.out, "output directory (overrides the configuration)");
  cmd->add_option("--seed", o.seed, "shorthand for --set dataset.seed=N");
  cmd->add_option("--set", o.sets,
                  "dotted-path override, e.g. --set training.epochs=50 (repeatable)");
}

mevo::ExperimentConfig build_config(const CommonOpts& o) {
  if (!o.config_path.empty() && !o.preset.empty())
    throw mevo::ConfigError("give --config or --preset, not both");
  std::string text, source;
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) throw mevo::ConfigError("cannot read configuration file: " + o.config_path);
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
    source = o.config_path;
  } else if (!o.preset.empty()) {
    text = mevo::preset_text(o.preset, o.scale);
    source = o.preset + "." + o.scale;
  } else {
    throw mevo::ConfigError("need --config FILE or --preset NAME");
  }
  if (!o.seed.empty()) text = mevo::apply_override(text, "dataset.seed=" + o.seed);
  for (const auto& s : o.sets) text = mevo::apply_override(text, s);
  mevo::ExperimentConfig cfg = mevo::ExperimentConfig::from_json(text, source);
  if (!o.out.empty()) cfg.output = o.out;
  return cfg;
}

// Post-run notes recorded by the command (final losses, bound verdicts).
void echo_notes(const std::string& dir, const char* cmd) {
  try {
    std::ifstream in(fs::path(dir) / mevo::kManifestFile);
    if (!in) return;
    const auto m = nlohmann::json::parse(in);
    if (!m.contains("notes") || !m.at("notes").contains(cmd)) return;
    for (const auto& [key, val] : m.at("notes").at(cmd).items())
      std::printf("  %s: %s\n", key.c_str(), val.dump().c_str());
  } catch (...) {
    // cosmetic only
  }
}

void list_outputs(const std::string& dir, const std::vector<const char*>& names) {
  for (const char* f : names)
    if (fs::exists(fs::path(dir) / f)) std::printf("  wrote %s/%s\n", dir.c_str(), f);
}

int run_verify(std::vector<int> ids, const std::string& scratch) {
  if (ids.empty()) ids = mevo::criterion_ids();
  int failed = 0;
  for (int id : ids) {
    const mevo::CriterionResult res = mevo::run_criterion(id, scratch);
    std::printf("criterion %d: %s\n", res.id, res.title.c_str());
    for (const auto& d : res.details) std::printf("  %s\n", d.c_str());
    std::printf("  -> %s  (%.1fs)\n", res.passed ? "PASS" : "FAIL", res.seconds);
    std::fflush(stdout);
    if (!res.passed) ++failed;
  }
  std::printf("%zu criteria run, %d failed\n", ids.size(), failed);
  return failed == 0 ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"modal evolution operators learned from PDE snapshot data"};
  app.require_subcommand(1);

  int threads = 0;
  app.add_option("--threads", threads, "worker threads (0 keeps the OpenMP default)");

  CommonOpts og, ot, op, oa;
  CLI::App* g = app.add_subcommand("generate", "sample modal states and evolve them one lag");
  add_common(g, og);
  CLI::App* tr = app.add_subcommand("train", "fit the residual network to the snapshot pairs");
  add_common(tr, ot);
  CLI::App* pr = app.add_subcommand("predict", "roll the trained network out recursively");
  add_common(pr, op);
  CLI::App* an = app.add_subcommand("analyze", "evaluate the step-error bound along a rollout");
  add_common(an, oa);

  std::vector<int> criteria;
  std::string scratch = "verify-scratch";
  CLI::App* vf = app.add_subcommand("verify", "run the numbered acceptance checks");
  vf->add_option("--criterion", criteria, "criterion ids to run (default: all)");
  vf->add_option("--scratch", scratch, "working directory for the checks")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (threads > 0) mevo::set_threads(threads);
    if (vf->parsed()) return run_verify(criteria, scratch);

    if (g->parsed()) {
      const auto cfg = build_config(og);
      mevo::cmd_generate(cfg);
      list_outputs(cfg.output, {mevo::kDatasetFile, mevo::kBasisFile});
      echo_notes(cfg.output, "generate");
    } else if (tr->parsed()) {
      const auto cfg = build_config(ot);
      mevo::cmd_train(cfg);
      list_outputs(cfg.output, {mevo::kModelFile, mevo::kLossFile});
      echo_notes(cfg.output, "train");
    } else if (pr->parsed()) {
      const auto cfg = build_config(op);
      mevo::cmd_predict(cfg);
      list_outputs(cfg.output,
                   {mevo::kPredictedFile, mevo::kOptimalFile, mevo::kGalerkinFile});
      echo_notes(cfg.output, "predict");
    } else if (an->parsed()) {
      const auto cfg = build_config(oa);
      mevo::cmd_analyze(cfg);
      list_outputs(cfg.output, {mevo::kErrorReportFile});
      echo_notes(cfg.output, "analyze");
    }
    return 0;
  } catch (const mevo::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const mevo::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
}
