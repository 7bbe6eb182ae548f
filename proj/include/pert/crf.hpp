#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pert/features.hpp"

namespace pert {

/// Per-position emission scores and the shared transition matrix of one
/// sentence, all in log space. Row-major: emission[t * L + y],
/// transition[from * L + to].
struct Lattice {
  std::size_t length = 0;
  std::size_t labels = 0;
  std::vector<double> emission;
  std::vector<double> transition;

  Lattice() = default;
  Lattice(std::size_t length, std::size_t labels)
      : length(length), labels(labels), emission(length * labels, 0.0),
        transition(labels * labels, 0.0) {}

  double& emit(std::size_t t, std::size_t y) { return emission[t * labels + y]; }
  double emit(std::size_t t, std::size_t y) const { return emission[t * labels + y]; }
  double& trans(std::size_t from, std::size_t to) { return transition[from * labels + to]; }
  double trans(std::size_t from, std::size_t to) const { return transition[from * labels + to]; }

  /// Total score of one label path.
  double path_score(std::span<const std::size_t> path) const;
};

struct ForwardResult {
  std::vector<double> alpha;  // length * labels
  double log_z = 0.0;
};

struct BackwardResult {
  std::vector<double> beta;  // length * labels
  double log_z = 0.0;
};

struct Marginals {
  std::size_t length = 0;
  std::size_t labels = 0;
  std::vector<double> unary;     // length * labels
  std::vector<double> pairwise;  // (length - 1) * labels * labels, [t][from][to]

  double node(std::size_t t, std::size_t y) const { return unary[t * labels + y]; }
  double edge(std::size_t t, std::size_t from, std::size_t to) const {
    return pairwise[(t * labels + from) * labels + to];
  }
};

struct Decoded {
  std::vector<std::size_t> labels;
  double score = 0.0;
};

double log_sum_exp(std::span<const double> values);

ForwardResult forward(const Lattice& lattice);
BackwardResult backward(const Lattice& lattice);
Marginals marginals(const Lattice& lattice, const ForwardResult& fwd, const BackwardResult& bwd);

/// Highest-scoring path. Ties go to the lower label index at every
/// backtrace decision, starting from the final position.
Decoded viterbi(const Lattice& lattice);

/// Linear-chain CRF with label-pair transitions and feature-by-label
/// emission weights. emission[f * L + y], transition[from * L + to].
struct CrfModel {
  std::vector<std::string> labels;
  FeatureIndex features;
  std::vector<double> emission;
  std::vector<double> transition;
  FeatureTemplate tmpl;

  CrfModel() = default;
  CrfModel(std::vector<std::string> labels, FeatureIndex features, FeatureTemplate tmpl);

  std::size_t num_labels() const noexcept { return labels.size(); }
  std::size_t num_features() const noexcept { return features.size(); }
  std::size_t num_weights() const noexcept { return emission.size() + transition.size(); }
  std::optional<std::size_t> label_id(std::string_view label) const;

  /// Throws DataError when dimensions disagree, labels repeat, or a weight is
  /// not finite.
  void validate() const;

  /// Copies a flat [emission | transition] vector into the weights.
  void set_weights(std::span<const double> flat);
  std::vector<double> flat_weights() const;

  friend bool operator==(const CrfModel&, const CrfModel&) = default;
};

using EncodedPositions = std::vector<std::vector<std::uint32_t>>;

struct EncodedSequence {
  EncodedPositions features;
  std::vector<std::uint32_t> labels;
};

struct LabeledSequence {
  std::vector<FeatureVector> features;
  std::vector<std::string> labels;
};

EncodedPositions encode_features(const CrfModel& model, std::span<const FeatureVector> features);

/// Throws DataError on a gold label the model does not know.
EncodedSequence encode_sequence(const CrfModel& model, const LabeledSequence& sequence);

Lattice score_lattice(const CrfModel& model, std::span<const FeatureVector> features);
Lattice score_lattice(const CrfModel& model, const EncodedPositions& features);

/// Smooth part of the training objective and its gradient over a batch:
/// sum of (log Z - gold score) plus (l2 / 2) * ||w||^2. The gradient is laid
/// out like CrfModel::flat_weights(). The batch is split into `threads`
/// contiguous chunks reduced in chunk order, so results depend only on the
/// batch order and thread count.
struct ObjectiveValue {
  double value = 0.0;
  std::vector<double> gradient;
};

ObjectiveValue nll_and_gradient(const CrfModel& model, std::span<const EncodedSequence> batch,
                                double l2, unsigned threads = 1);

struct TrainConfig {
  double l1 = 0.1;
  double l2 = 0.1;
  std::size_t max_iterations = 100;
  std::size_t memory = 10;
  double tolerance = 1e-5;
  std::size_t min_count = 1;
  /// Validation is scored every `eval_every` iterations and at the last one.
  std::size_t eval_every = 10;
  unsigned threads = 1;

  /// Throws UsageError for out-of-domain values.
  void validate() const;
};

struct IterationLog {
  std::size_t iteration = 0;
  double objective = 0.0;
  std::size_t nonzero = 0;
  std::optional<double> validation;
};

struct TrainResult {
  CrfModel model;
  std::vector<IterationLog> log;
  double initial_objective = 0.0;
  double final_objective = 0.0;
  /// Iteration whose weights were kept (best validation score, else last).
  std::size_t selected_iteration = 0;
  std::optional<double> selected_validation;
};

using Validator = std::function<double(const CrfModel&)>;
using IterationObserver = std::function<void(const IterationLog&)>;

/// Elastic-net maximum likelihood by orthant-wise L-BFGS from zero weights.
/// With a validator, the snapshot with the highest validation score (first
/// one on ties) is returned. `labels` fixes the label order; when empty,
/// labels are numbered by first occurrence in the data.
TrainResult train(std::span<const LabeledSequence> data, const FeatureTemplate& tmpl,
                  const TrainConfig& config, const Validator& validator = {},
                  const IterationObserver& observer = {},
                  std::vector<std::string> labels = {});

Decoded viterbi(const CrfModel& model, std::span<const FeatureVector> features);
std::vector<std::string> tag(const CrfModel& model, std::span<const FeatureVector> features);

inline constexpr int kModelFormatVersion = 1;

std::string save_model(const CrfModel& model);
void save_model(const CrfModel& model, std::ostream& out);
CrfModel load_model(std::string_view text);
CrfModel load_model_file(const std::string& path);

}  // namespace pert
