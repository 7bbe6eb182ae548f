#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pert/corpus.hpp"
#include "pert/crf.hpp"
#include "pert/metrics.hpp"
#include "pert/report.hpp"

namespace pert {

enum class Task { Ezafe, Pos, PosEzInput, Joint };

/// "ezafe", "pos", "pos-ez-input", "joint".
std::string task_name(Task task);
std::optional<Task> parse_task(std::string_view name);

/// Where the ezafe flags fed to a POS tagger come from.
enum class EzafeMode { None, Gold, Predicted };
std::string ezafe_mode_name(EzafeMode mode);

struct ExperimentData {
  Corpus train;
  Corpus valid;
  Corpus test;
};

struct RunResult {
  TrainResult training;
  EvalReport report;
};

inline constexpr std::string_view kNoEzafe = "0";
inline constexpr std::string_view kEzafe = "1";

/// "<pos>|<0|1>" for the joint tag space.
std::string joint_label(std::string_view pos, std::uint8_t ezafe);
std::pair<std::string, std::uint8_t> split_joint_label(std::string_view label);

/// What a trained model predicts, read off its labels and template.
Task infer_task(const CrfModel& model);

std::vector<LabeledSequence> ezafe_sequences(const Corpus& corpus, const FeatureTemplate& tmpl);
/// `ezafe` supplies the input flags when the template takes them.
std::vector<LabeledSequence> pos_sequences(const Corpus& corpus, const FeatureTemplate& tmpl,
                                           const FlagSequences* ezafe = nullptr);
std::vector<LabeledSequence> joint_sequences(const Corpus& corpus, const FeatureTemplate& tmpl);

FlagSequences gold_ezafe(const Corpus& corpus);
TagSequences gold_pos(const Corpus& corpus);

FlagSequences predict_ezafe(const CrfModel& ezafe_model, const std::vector<std::vector<std::string>>& sentences);
FlagSequences predict_ezafe(const CrfModel& ezafe_model, const Corpus& corpus);
TagSequences predict_tags(const CrfModel& model, const std::vector<std::vector<std::string>>& sentences,
                          const FlagSequences* ezafe = nullptr);
TagSequences predict_tags(const CrfModel& model, const Corpus& corpus, const FlagSequences* ezafe = nullptr);

/// Positive-class ezafe scores plus the per-gold-POS F1 breakdown.
EvalSection evaluate_ezafe(const FlagSequences& gold, const FlagSequences& pred, const Corpus& corpus,
                           std::string name);
/// Macro POS scores. The tag set is the model's labels plus any unseen gold tags.
EvalSection evaluate_pos(const TagSequences& gold, const TagSequences& pred,
                         const std::vector<std::string>& model_tags, std::string name);

/// Sections for a trained model scored against a gold corpus: one ezafe or
/// POS section, or both for a joint model. A pos-ez-input model reads flags
/// from `ezafe_model` when given, else the corpus's gold flags.
std::vector<EvalSection> evaluate_model(const CrfModel& model, const Corpus& corpus, const std::string& name,
                                        const CrfModel* ezafe_model = nullptr);

/// F1 per tag from a section, for delta_report.
ScoreMap f1_by_tag(const EvalSection& section);

/// Ezafe recognition: train on {0,1} labels, select by validation F1, score
/// valid and test.
RunResult run_ezafe(const ExperimentData& data, FeatureTemplate tmpl, const TrainConfig& config,
                    const IterationObserver& observer = {});

/// POS tagging. For Gold/Predicted the template gains ezafe input and every
/// split is annotated from that source; Predicted needs `ezafe_model`.
RunResult run_pos(const ExperimentData& data, FeatureTemplate tmpl, const TrainConfig& config,
                  EzafeMode mode, const CrfModel* ezafe_model = nullptr,
                  const IterationObserver& observer = {});

/// Joint tagging over observed (pos, ezafe) pairs; reports both projections.
RunResult run_joint(const ExperimentData& data, FeatureTemplate tmpl, const TrainConfig& config,
                    const IterationObserver& observer = {});

/// Two-stage tagging: ezafe flags from `ezafe_model`, then POS from
/// `pos_model` using those flags as input features.
Corpus pipeline_tag(const std::vector<std::vector<std::string>>& sentences, const CrfModel& ezafe_model,
                    const CrfModel& pos_model);

}  // namespace pert
