#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pert/tasks.hpp"

namespace pert {

/// Flat `key = value` experiment description. Recognized keys: task,
/// template, l1, l2, max_iter, seed, train, valid, test, ezafe_model, out,
/// ezafe_source. With neither `valid` nor `test`, `train` is split 80/10/10
/// with `seed`.
struct ExperimentConfig {
  Task task = Task::Ezafe;
  FeatureTemplate tmpl;
  TrainConfig train_config;
  std::uint64_t seed = 17;
  std::string train_path;
  std::string valid_path;
  std::string test_path;
  std::string ezafe_model_path;
  std::string out_dir;
  EzafeMode ezafe_source = EzafeMode::Predicted;
  std::size_t max_sentence_length = 512;
  /// Every key-value pair as written, for the report header.
  std::vector<std::pair<std::string, std::string>> entries;

  void validate() const;
};

ExperimentConfig parse_experiment_config(std::string_view text);

struct ExperimentOutcome {
  RunResult run;
  /// For pos-ez-input: the same tagger trained without ezafe input.
  std::optional<RunResult> baseline;
  EvalReport report;
};

ExperimentOutcome run_experiment(const ExperimentConfig& config, const IterationObserver& observer = {});

/// One line per iteration: iteration, objective, nonzero weights, validation score.
std::string format_training_log(const TrainResult& training);

/// Writes model.crf, report.txt, report.json and train.log (plus baseline
/// files when present) into config.out_dir.
void write_experiment_outputs(const ExperimentConfig& config, const ExperimentOutcome& outcome);

}  // namespace pert
