#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "mevo/dataset.hpp"
#include "mevo/errors.hpp"
#include "mevo/experiment.hpp"
#include "mevo/sha256.hpp"

using namespace mevo;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.1415926535897932384626433832795;

std::string smoke_config(const std::string& out_dir) {
  std::string text = R"({
    "name": "smoke",
    "basis": {"kind": "sine", "n": 3, "domain": {"lo": 0, "hi": "pi", "boundary": "dirichlet"}},
    "pde": {"kind": "diffusion", "sigma": 0.2},
    "dataset": {"delta": 0.1, "count": 8, "seed": 5,
                "box": {"units": "coefficient", "bounds": [1.0, 0.7, 0.4]}},
    "network": {"blocks": 1, "depth": 1, "width": 4, "activation": "tanh", "seed": 3},
    "training": {"epochs": 2, "batch": 4, "lr": 0.001, "optimizer": "adam", "shuffle_seed": 1},
    "prediction": {"ic": "quartic-dirichlet", "horizon_steps": 3,
                   "probe_count": 40, "probe_seed": 9}
  })";
  return apply_override(text, "output=" + out_dir);
}

}  // namespace

TEST_CASE("presets resolve by name and scale") {
  const auto& all = embedded_presets();
  CHECK(all.size() == 14);  // seven experiments at two scales
  CHECK(all.count("ex1-advection.desk") == 1);
  CHECK(!preset_text("ex3-burgers-sig0.5", "desk").empty());  // dots in the name survive
  CHECK(!preset_text("ex5-advdiff2d", "paper").empty());
  try {
    preset_text("ex9-unknown", "desk");
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("available") != std::string::npos);
  }
  // every embedded preset must parse and validate
  for (const auto& [key, text] : all) CHECK_NOTHROW(ExperimentConfig::from_json(text, key));
}

TEST_CASE("named start fields cover both dimensions") {
  CHECK(initial_condition_ids().size() == 4);
  for (const auto& id : initial_condition_ids())
    CHECK(make_initial_condition(id).eval(0.3, 0.4) ==
          make_initial_condition(id).eval(0.3, 0.4));
  InitialCondition ic = make_initial_condition("half-exp-sin");
  CHECK(ic.dims == 1);
  CHECK(ic.eval(kPi / 2.0, 0.0) == doctest::Approx(0.5 * std::exp(1.0)).epsilon(1e-15));
  CHECK(make_initial_condition("exp-sin-cos-2d").dims == 2);
  CHECK_THROWS_AS(make_initial_condition("no-such-field"), ConfigError);
}

TEST_CASE("config parsing reports the offending path") {
  const std::string base = smoke_config("unused-out");

  auto expect_mention = [&](const std::string& text, const std::string& needle) {
    try {
      ExperimentConfig::from_json(text, "probe");
      FAIL("expected a config error mentioning " << needle);
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };

  expect_mention("{not json", "probe");
  expect_mention(apply_override(base, "pde.kind=warp"), "pde.kind");
  expect_mention(apply_override(base, "dataset.eta=1.0"), "eta");
  expect_mention(apply_override(base, "dataset.count=0"), "count");
  expect_mention(apply_override(base, "bogus=1"), "bogus");
  expect_mention(apply_override(base, "network.blocks=0"), "network");

  // real-trig needs an odd width
  std::string trig = apply_override(base, R"(basis={"kind":"real-trig","n":6,"domain":{"lo":0,"hi":"2pi","boundary":"periodic"}})");
  expect_mention(trig, "odd");

  // the Burgers marches are pinned to (-pi, pi)
  std::string burgers = smoke_config("unused-out");
  burgers = apply_override(burgers, R"(pde={"kind":"viscous-burgers","sigma":0.5})");
  expect_mention(burgers, "(-pi, pi)");

  // a 2-d equation needs a 2-d basis, and the start field must match
  expect_mention(apply_override(base, R"(pde={"kind":"advection-diffusion-2d","alpha":[1,0.7],"sigma":[0.1,0.16]})"),
                 "two-dimensional");
  expect_mention(apply_override(base, "prediction.ic=exp-sin-cos-2d"), "exp-sin-cos-2d");

  // bound count is checked against the basis width
  expect_mention(apply_override(base, "dataset.box.bounds=[1.0,0.7]"), "bounds");
}

TEST_CASE("overrides rewrite scalars, array slots, and whole sections") {
  const std::string base = smoke_config("unused-out");
  ExperimentConfig cfg = ExperimentConfig::from_json(apply_override(base, "dataset.count=17"), "t");
  CHECK(cfg.dataset.count == 17);

  cfg = ExperimentConfig::from_json(apply_override(base, "dataset.box.bounds.2=0.55"), "t");
  CHECK(cfg.dataset.bounds[2] == 0.55);

  cfg = ExperimentConfig::from_json(apply_override(base, "training.optimizer=sgd"), "t");
  CHECK(cfg.training.optimizer == OptimizerKind::Sgd);

  CHECK_THROWS_AS(apply_override(base, "dataset.count"), ConfigError);
  CHECK_THROWS_AS(apply_override(base, "dataset.box.bounds.7=1"), ConfigError);
  CHECK_THROWS_AS(apply_override(base, "dataset.box.bounds.x=1"), ConfigError);
  CHECK_THROWS_AS(apply_override(base, "name.deeper=1"), ConfigError);
}

TEST_CASE("wavenumber bounds convert through the basis normalization") {
  ExperimentConfig cfg =
      ExperimentConfig::from_json(preset_text("ex1-advection", "desk"), "preset");
  ModalBox box = cfg.box();
  REQUIRE(box.dim() == 7);
  const double len = 2.0 * kPi;
  CHECK(box.hi(0) == doctest::Approx(0.8 * std::sqrt(len)).epsilon(1e-14));
  for (int k = 1; k <= 3; ++k) {
    const double b = k == 1 ? 0.8 : (k == 2 ? 0.2 : 0.03);
    CHECK(box.hi(2 * k - 1) == doctest::Approx(b * std::sqrt(2.0 * len)).epsilon(1e-14));
    CHECK(box.hi(2 * k) == doctest::Approx(b * std::sqrt(2.0 * len)).epsilon(1e-14));
  }
  CHECK((box.lo.array() == (-box.hi).array()).all());

  // sine bases scale by sqrt(length / 2)
  std::string sine = smoke_config("unused-out");
  sine = apply_override(sine, R"(dataset.box={"units":"wavenumber","bounds":[1.0,0.5,0.25]})");
  ModalBox sbox = ExperimentConfig::from_json(sine, "t").box();
  CHECK(sbox.hi(0) == doctest::Approx(std::sqrt(kPi / 2.0)).epsilon(1e-14));
  CHECK(sbox.hi(1) == doctest::Approx(0.5 * std::sqrt(kPi / 2.0)).epsilon(1e-14));
  CHECK(sbox.hi(2) == doctest::Approx(0.25 * std::sqrt(kPi / 2.0)).epsilon(1e-14));

  // coefficient bounds pass through untouched
  ModalBox cbox = ExperimentConfig::from_json(smoke_config("unused-out"), "t").box();
  CHECK(cbox.hi(0) == 1.0);
  CHECK(cbox.hi(1) == 0.7);
  CHECK(cbox.hi(2) == 0.4);
}

TEST_CASE("network width always comes from the basis") {
  ExperimentConfig cfg = ExperimentConfig::from_json(smoke_config("unused-out"), "t");
  CHECK(cfg.network.n == 3);
  CHECK(cfg.basis->n() == 3);
  CHECK(!cfg.resolved_json.empty());
}

TEST_CASE("missing configuration files are a config error") {
  CHECK_THROWS_AS(ExperimentConfig::load("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("the output lock is exclusive and released on scope exit") {
  const fs::path dir = fs::temp_directory_path() / "mevo_lock_probe";
  fs::remove_all(dir);
  {
    LockFile lock(dir.string());
    CHECK(fs::exists(dir / ".lock"));
    try {
      LockFile second(dir.string());
      FAIL("expected the lock to be held");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("in use") != std::string::npos);
    }
  }
  CHECK(!fs::exists(dir / ".lock"));
  CHECK_NOTHROW(LockFile(dir.string()));
  fs::remove_all(dir);
}

TEST_CASE("the four pipeline commands leave a coherent output directory") {
  const fs::path dir = fs::temp_directory_path() / "mevo_cli_smoke";
  fs::remove_all(dir);
  ExperimentConfig cfg = ExperimentConfig::from_json(smoke_config(dir.string()), "smoke");

  cmd_generate(cfg);
  REQUIRE(fs::exists(dir / kDatasetFile));
  REQUIRE(fs::exists(dir / kBasisFile));
  REQUIRE(fs::exists(dir / kManifestFile));
  PairDataset ds = load_dataset((dir / kDatasetFile).string());
  CHECK(ds.size() == 8);
  CHECK(ds.n() == 3);
  CHECK(ds.delta == 0.1);

  {
    std::ifstream in(dir / kManifestFile);
    nlohmann::json m = nlohmann::json::parse(in);
    const std::string recorded = m.at("files").at(kDatasetFile).at("sha256");
    CHECK(recorded == sha256_file_hex((dir / kDatasetFile).string()));
    CHECK(m.at("commands").contains("generate"));
  }

  cmd_train(cfg);
  REQUIRE(fs::exists(dir / kModelFile));
  REQUIRE(fs::exists(dir / kLossFile));

  cmd_predict(cfg);
  REQUIRE(fs::exists(dir / kPredictedFile));
  REQUIRE(fs::exists(dir / kOptimalFile));
  REQUIRE(fs::exists(dir / kGalerkinFile));
  Trajectory pred = load_trajectory_csv((dir / kPredictedFile).string(), cfg.basis);
  CHECK(pred.v.size() == 4);  // horizon 3

  cmd_analyze(cfg);
  REQUIRE(fs::exists(dir / kErrorReportFile));
  {
    std::ifstream in(dir / kErrorReportFile);
    nlohmann::json rep = nlohmann::json::parse(in);
    CHECK(rep.at("holds").is_boolean());
    CHECK(rep.at("times").size() == 4);
    CHECK(rep.at("probe_count") == 40);
  }
  {
    std::ifstream in(dir / kManifestFile);
    nlohmann::json m = nlohmann::json::parse(in);
    for (const char* f : {kDatasetFile, kBasisFile, kModelFile, kLossFile, kPredictedFile,
                          kOptimalFile, kGalerkinFile, kErrorReportFile})
      CHECK(m.at("files").contains(f));
    for (const char* c : {"generate", "train", "predict", "analyze"})
      CHECK(m.at("commands").contains(c));
    CHECK(m.at("notes").at("train").contains("final_train_loss"));
  }
  fs::remove_all(dir);
}
