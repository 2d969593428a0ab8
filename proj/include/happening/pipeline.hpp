#pragma once
// End-to-end orchestration: load -> series preparation -> embedding training
// -> dataset build -> classifier training -> iterative prediction ->
// inference -> reports. Stage failures carry the stage so the CLI can map
// them to exit codes (0 ok, 1 config, 2 load, 3 training, 4 prediction,
// 5 inference, 6 evaluation). Configuration is a flat key=value file with
// CLI-flag overrides; the seed is mandatory and all randomness derives from
// (seed, stage name).

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "happening/classifier.hpp"
#include "happening/dataset.hpp"
#include "happening/eval.hpp"
#include "happening/inference.hpp"
#include "happening/prediction.hpp"

namespace happening {

enum class Stage {
  Config = 1,
  Load = 2,
  Training = 3,
  Prediction = 4,
  Inference = 5,
  Evaluation = 6,
};

std::string to_string(Stage s);

class StageError : public std::runtime_error {
 public:
  StageError(Stage stage, const std::string& what)
      : std::runtime_error("[" + to_string(stage) + "] " + what), stage_(stage) {}
  Stage stage() const { return stage_; }
  int exit_code() const { return static_cast<int>(stage_); }

 private:
  Stage stage_;
};

struct PipelineConfig {
  std::string events_path;
  std::string relations_path;
  std::optional<std::string> series_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;  // mandatory for every run

  ClassifierKind classifier = ClassifierKind::RF;
  unsigned feature_groups = kGroupAll;
  EmbedTrainConfig embed;
  LogRegParams logreg;
  RfParams forest;
  InferenceConfig inference;
  std::size_t candidates_k = 50;
  int folds = 10;
  bool skip_prediction = false;
  int threads = 1;
  double impurity_threshold = kDefaultImpurityThreshold;
  std::set<std::string> excluded_types = default_excluded_types();
  bool dump_forests = false;
  std::vector<double> corruption_factors = {0.05, 0.10, 0.15};

  // Throws StageError(Config) when required entries are missing or invalid.
  void validate(bool needs_inputs = true, bool needs_out = true, bool needs_seed = true) const;
};

// Flat key=value lines; '#' starts a comment. Unknown keys are config errors.
void apply_config_file(PipelineConfig& cfg, const std::string& path);
void apply_config_entry(PipelineConfig& cfg, const std::string& key, const std::string& value);

struct LoadedInputs {
  EventGraph graph;
  PreparedSeries prep;
  ValidationReport validation;
};

LoadedInputs pipeline_load(const PipelineConfig& cfg);

struct TrainedArtifacts {
  EmbeddingModel model;
  TfIdfIndex index;
  Classifier classifier;
  std::vector<LabeledPair> pairs;  // positives then negatives
  std::vector<std::string> warnings;
};

TrainedArtifacts pipeline_train(const PipelineConfig& cfg, const EventGraph& g,
                                const PreparedSeries& prep);

struct PipelineResult {
  std::map<std::string, std::string> outputs;  // artifact name -> path (non-empty files)
  std::size_t predicted_relations = 0;
  std::size_t inferred_events = 0;
  std::size_t inferred_relations = 0;
};

PipelineResult run_pipeline(const PipelineConfig& cfg);

}  // namespace happening
