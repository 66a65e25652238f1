#pragma once

// Experiment configuration: the JSON schema tying a basis, an equation, and
// the sampling/network/training settings together; the embedded presets; the
// named start fields; and the pipeline commands generate / train / predict /
// analyze with their fixed output-file layout.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mevo/basis.hpp"
#include "mevo/dataset.hpp"
#include "mevo/prediction.hpp"
#include "mevo/resnet.hpp"
#include "mevo/solvers.hpp"
#include "mevo/training.hpp"

namespace mevo {

// Built-in configurations compiled in from presets/*.json; the key is the
// file name without extension, "<experiment>.<scale>".
const std::map<std::string, std::string>& embedded_presets();
// Lookup; unknown names throw ConfigError listing what is available.
const std::string& preset_text(const std::string& name, const std::string& scale);

// Closed-form start fields selectable by id in the prediction section.
InitialCondition make_initial_condition(const std::string& id);
std::vector<std::string> initial_condition_ids();

// Units of the sampling-box bounds: one symmetric bound per wavenumber
// (converted through the basis normalization) or directly per coefficient.
enum class BoxUnits { Wavenumber, Coefficient };

struct DatasetSection {
  double delta = 0.1;
  int64_t count = 0;
  uint64_t seed = 42;
  double eta = 0.0;  // multiplicative noise level; 0 = clean
  uint64_t noise_seed = 1;
  BoxUnits units = BoxUnits::Coefficient;
  std::vector<double> bounds;
};

struct PredictionSection {
  std::string ic;
  int horizon_steps = 0;
  int64_t probe_count = 10000;
  uint64_t probe_seed = 424242;
  bool galerkin = true;  // also integrate the modal ODE for comparison
  ReferenceConfig reference;
};

struct ExperimentConfig {
  std::string name;
  BasisPtr basis;
  PdeSpec pde;
  SolverConfig solver;
  DatasetSection dataset;
  ResNetConfig network;  // n comes from the basis, not the file
  TrainConfig training;
  PredictionSection prediction;
  std::string output = "out";
  std::string resolved_json;  // exact text this configuration was parsed from

  // Sampling box in coefficient units (bounds converted when necessary).
  ModalBox box() const;

  // Parses and validates; unknown keys and malformed values name the source
  // and the offending path. `source` is used in error messages only.
  static ExperimentConfig from_json(const std::string& text, const std::string& source);
  static ExperimentConfig load(const std::string& path);
};

// Applies one "dotted.path=value" assignment to configuration text; the value
// is parsed as JSON when possible and taken as a string otherwise. Numeric
// path tokens index into arrays.
std::string apply_override(const std::string& json_text, const std::string& assignment);

// Mutual exclusion for an output directory: creates <dir>/.lock exclusively
// (the directory itself is created first if needed), removes it on scope
// exit. A held lock makes construction fail.
class LockFile {
 public:
  explicit LockFile(const std::string& dir);
  ~LockFile();
  LockFile(const LockFile&) = delete;
  LockFile& operator=(const LockFile&) = delete;

 private:
  std::string path_;
};

// Fixed file names inside the output directory.
extern const char* const kDatasetFile;      // dataset.mevd
extern const char* const kBasisFile;        // basis.json
extern const char* const kModelFile;        // model.mevm
extern const char* const kLossFile;         // loss_history.csv
extern const char* const kPredictedFile;    // predicted.csv
extern const char* const kOptimalFile;      // optimal.csv
extern const char* const kGalerkinFile;     // galerkin.csv
extern const char* const kErrorReportFile;  // error_report.json
extern const char* const kManifestFile;     // manifest.json

// Pipeline commands. Each takes the lock, writes its fixed file set into
// cfg.output, and records content hashes in manifest.json (content only, no
// timestamps, so identical runs leave identical directories).
void cmd_generate(const ExperimentConfig& cfg);
void cmd_train(const ExperimentConfig& cfg);
void cmd_predict(const ExperimentConfig& cfg);
void cmd_analyze(const ExperimentConfig& cfg);

}  // namespace mevo
