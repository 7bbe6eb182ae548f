#include "pert/crf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "pert/error.hpp"
#include "pert/owlqn.hpp"

namespace pert {

double Lattice::path_score(std::span<const std::size_t> path) const {
  double s = emit(0, path[0]);
  for (std::size_t t = 1; t < path.size(); ++t) {
    s += trans(path[t - 1], path[t]);
    s += emit(t, path[t]);
  }
  return s;
}

double log_sum_exp(std::span<const double> values) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : values) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : values) s += std::exp(v - m);
  return m + std::log(s);
}

ForwardResult forward(const Lattice& lat) {
  const std::size_t T = lat.length, L = lat.labels;
  ForwardResult r;
  r.alpha.assign(T * L, 0.0);
  std::vector<double> scratch(L);
  for (std::size_t y = 0; y < L; ++y) r.alpha[y] = lat.emit(0, y);
  for (std::size_t t = 1; t < T; ++t) {
    const double* prev = &r.alpha[(t - 1) * L];
    for (std::size_t y = 0; y < L; ++y) {
      for (std::size_t p = 0; p < L; ++p) scratch[p] = prev[p] + lat.trans(p, y);
      r.alpha[t * L + y] = log_sum_exp(scratch) + lat.emit(t, y);
    }
  }
  r.log_z = log_sum_exp(std::span<const double>(&r.alpha[(T - 1) * L], L));
  return r;
}

BackwardResult backward(const Lattice& lat) {
  const std::size_t T = lat.length, L = lat.labels;
  BackwardResult r;
  r.beta.assign(T * L, 0.0);
  std::vector<double> scratch(L);
  for (std::size_t t = T - 1; t-- > 0;) {
    const double* next = &r.beta[(t + 1) * L];
    for (std::size_t y = 0; y < L; ++y) {
      for (std::size_t n = 0; n < L; ++n) scratch[n] = lat.trans(y, n) + lat.emit(t + 1, n) + next[n];
      r.beta[t * L + y] = log_sum_exp(scratch);
    }
  }
  for (std::size_t y = 0; y < L; ++y) scratch[y] = lat.emit(0, y) + r.beta[y];
  r.log_z = log_sum_exp(scratch);
  return r;
}

Marginals marginals(const Lattice& lat, const ForwardResult& fwd, const BackwardResult& bwd) {
  const std::size_t T = lat.length, L = lat.labels;
  Marginals m;
  m.length = T;
  m.labels = L;
  m.unary.resize(T * L);
  m.pairwise.resize(T > 0 ? (T - 1) * L * L : 0);
  const double log_z = fwd.log_z;
  for (std::size_t i = 0; i < T * L; ++i) m.unary[i] = std::exp(fwd.alpha[i] + bwd.beta[i] - log_z);
  for (std::size_t t = 0; t + 1 < T; ++t) {
    for (std::size_t a = 0; a < L; ++a) {
      const double left = fwd.alpha[t * L + a];
      for (std::size_t b = 0; b < L; ++b) {
        m.pairwise[(t * L + a) * L + b] =
            std::exp(left + lat.trans(a, b) + lat.emit(t + 1, b) + bwd.beta[(t + 1) * L + b] - log_z);
      }
    }
  }
  return m;
}

Decoded viterbi(const Lattice& lat) {
  const std::size_t T = lat.length, L = lat.labels;
  Decoded out;
  if (T == 0) return out;
  std::vector<double> delta(T * L);
  std::vector<std::size_t> back(T * L, 0);
  for (std::size_t y = 0; y < L; ++y) delta[y] = lat.emit(0, y);
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t y = 0; y < L; ++y) {
      std::size_t best = 0;
      double best_score = delta[(t - 1) * L] + lat.trans(0, y);
      for (std::size_t p = 1; p < L; ++p) {
        const double s = delta[(t - 1) * L + p] + lat.trans(p, y);
        if (s > best_score) {
          best_score = s;
          best = p;
        }
      }
      delta[t * L + y] = best_score + lat.emit(t, y);
      back[t * L + y] = best;
    }
  }
  std::size_t last = 0;
  for (std::size_t y = 1; y < L; ++y) {
    if (delta[(T - 1) * L + y] > delta[(T - 1) * L + last]) last = y;
  }
  out.score = delta[(T - 1) * L + last];
  out.labels.resize(T);
  out.labels[T - 1] = last;
  for (std::size_t t = T - 1; t > 0; --t) out.labels[t - 1] = back[t * L + out.labels[t]];
  return out;
}

CrfModel::CrfModel(std::vector<std::string> labels_, FeatureIndex features_, FeatureTemplate tmpl_)
    : labels(std::move(labels_)), features(std::move(features_)), tmpl(tmpl_) {
  emission.assign(features.size() * labels.size(), 0.0);
  transition.assign(labels.size() * labels.size(), 0.0);
}

std::optional<std::size_t> CrfModel::label_id(std::string_view label) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return i;
  }
  return std::nullopt;
}

void CrfModel::validate() const {
  if (labels.empty()) throw DataError("model has no labels");
  std::unordered_set<std::string_view> seen;
  for (const auto& l : labels) {
    if (!seen.insert(l).second) throw DataError("model label '" + l + "' repeated");
  }
  const std::size_t L = labels.size();
  if (emission.size() != features.size() * L) throw DataError("emission matrix has wrong size");
  if (transition.size() != L * L) throw DataError("transition matrix has wrong size");
  for (double w : emission) {
    if (!std::isfinite(w)) throw DataError("non-finite emission weight");
  }
  for (double w : transition) {
    if (!std::isfinite(w)) throw DataError("non-finite transition weight");
  }
}

void CrfModel::set_weights(std::span<const double> flat) {
  if (flat.size() != num_weights()) throw UsageError("weight vector has wrong size");
  std::copy(flat.begin(), flat.begin() + static_cast<long>(emission.size()), emission.begin());
  std::copy(flat.begin() + static_cast<long>(emission.size()), flat.end(), transition.begin());
}

std::vector<double> CrfModel::flat_weights() const {
  std::vector<double> flat(emission);
  flat.insert(flat.end(), transition.begin(), transition.end());
  return flat;
}

EncodedPositions encode_features(const CrfModel& model, std::span<const FeatureVector> features) {
  EncodedPositions out;
  out.reserve(features.size());
  for (const auto& f : features) out.push_back(model.features.encode(f));
  return out;
}

EncodedSequence encode_sequence(const CrfModel& model, const LabeledSequence& sequence) {
  if (sequence.features.size() != sequence.labels.size()) {
    throw DataError("sequence has " + std::to_string(sequence.features.size()) +
                    " feature positions but " + std::to_string(sequence.labels.size()) + " labels");
  }
  EncodedSequence out;
  out.features = encode_features(model, sequence.features);
  out.labels.reserve(sequence.labels.size());
  for (const auto& l : sequence.labels) {
    const auto id = model.label_id(l);
    if (!id) throw DataError("unknown gold label '" + l + "'");
    out.labels.push_back(static_cast<std::uint32_t>(*id));
  }
  return out;
}

Lattice score_lattice(const CrfModel& model, const EncodedPositions& features) {
  const std::size_t L = model.num_labels();
  Lattice lat(features.size(), L);
  lat.transition = model.transition;
  for (std::size_t t = 0; t < features.size(); ++t) {
    double* row = &lat.emission[t * L];
    for (const auto f : features[t]) {
      const double* w = &model.emission[static_cast<std::size_t>(f) * L];
      for (std::size_t y = 0; y < L; ++y) row[y] += w[y];
    }
  }
  return lat;
}

Lattice score_lattice(const CrfModel& model, std::span<const FeatureVector> features) {
  return score_lattice(model, encode_features(model, features));
}

namespace {

// Adds one sequence's (log Z - gold score) to `value` and its expected minus
// empirical counts to `grad`.
void accumulate_sequence(const CrfModel& model, const EncodedSequence& seq, double& value,
                         std::vector<double>& grad) {
  const std::size_t T = seq.labels.size();
  if (T == 0) return;
  const std::size_t L = model.num_labels();
  const std::size_t trans_offset = model.emission.size();

  const Lattice lat = score_lattice(model, seq.features);
  const ForwardResult fwd = forward(lat);
  const BackwardResult bwd = backward(lat);

  double gold = lat.emit(0, seq.labels[0]);
  for (std::size_t t = 1; t < T; ++t) {
    gold += lat.trans(seq.labels[t - 1], seq.labels[t]) + lat.emit(t, seq.labels[t]);
  }
  value += fwd.log_z - gold;

  std::vector<double> node(L);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t y = 0; y < L; ++y) {
      node[y] = std::exp(fwd.alpha[t * L + y] + bwd.beta[t * L + y] - fwd.log_z);
    }
    node[seq.labels[t]] -= 1.0;
    for (const auto f : seq.features[t]) {
      double* g = &grad[static_cast<std::size_t>(f) * L];
      for (std::size_t y = 0; y < L; ++y) g[y] += node[y];
    }
  }
  for (std::size_t t = 0; t + 1 < T; ++t) {
    for (std::size_t a = 0; a < L; ++a) {
      const double left = fwd.alpha[t * L + a] - fwd.log_z;
      double* g = &grad[trans_offset + a * L];
      for (std::size_t b = 0; b < L; ++b) {
        g[b] += std::exp(left + lat.trans(a, b) + lat.emit(t + 1, b) + bwd.beta[(t + 1) * L + b]);
      }
    }
    grad[trans_offset + seq.labels[t] * L + seq.labels[t + 1]] -= 1.0;
  }
}

}  // namespace

ObjectiveValue nll_and_gradient(const CrfModel& model, std::span<const EncodedSequence> batch,
                                double l2, unsigned threads) {
  const std::size_t W = model.num_weights();
  const std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(threads, batch.size()));

  std::vector<double> values(chunks, 0.0);
  std::vector<std::vector<double>> grads(chunks);
  auto work = [&](std::size_t c) {
    grads[c].assign(W, 0.0);
    const std::size_t begin = batch.size() * c / chunks;
    const std::size_t end = batch.size() * (c + 1) / chunks;
    for (std::size_t i = begin; i < end; ++i) accumulate_sequence(model, batch[i], values[c], grads[c]);
  };
  if (chunks == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(chunks);
    for (std::size_t c = 0; c < chunks; ++c) pool.emplace_back(work, c);
    for (auto& th : pool) th.join();
  }

  ObjectiveValue out;
  out.gradient = std::move(grads[0]);
  out.value = values[0];
  for (std::size_t c = 1; c < chunks; ++c) {
    out.value += values[c];
    for (std::size_t i = 0; i < W; ++i) out.gradient[i] += grads[c][i];
  }
  if (l2 > 0.0) {
    const auto w = model.flat_weights();
    double sq = 0.0;
    for (std::size_t i = 0; i < W; ++i) {
      sq += w[i] * w[i];
      out.gradient[i] += l2 * w[i];
    }
    out.value += 0.5 * l2 * sq;
  }
  return out;
}

void TrainConfig::validate() const {
  if (!(l1 >= 0.0) || !std::isfinite(l1)) throw UsageError("l1 must be a non-negative number");
  if (!(l2 >= 0.0) || !std::isfinite(l2)) throw UsageError("l2 must be a non-negative number");
  if (max_iterations == 0) throw UsageError("max_iterations must be positive");
  if (memory == 0) throw UsageError("memory must be positive");
  if (!(tolerance > 0.0)) throw UsageError("tolerance must be positive");
  if (eval_every == 0) throw UsageError("eval_every must be positive");
  if (threads == 0) throw UsageError("threads must be positive");
}

TrainResult train(std::span<const LabeledSequence> data, const FeatureTemplate& tmpl,
                  const TrainConfig& config, const Validator& validator,
                  const IterationObserver& observer, std::vector<std::string> labels) {
  config.validate();
  if (data.empty()) throw DataError("training data is empty");

  if (labels.empty()) {
    std::unordered_set<std::string_view> seen;
    for (const auto& seq : data) {
      for (const auto& l : seq.labels) {
        if (seen.insert(l).second) labels.push_back(l);
      }
    }
  }
  std::vector<std::vector<FeatureVector>> all_features;
  all_features.reserve(data.size());
  for (const auto& seq : data) all_features.push_back(seq.features);

  CrfModel model(std::move(labels), build_feature_index(all_features, config.min_count), tmpl);
  all_features.clear();

  std::vector<EncodedSequence> encoded;
  encoded.reserve(data.size());
  for (const auto& seq : data) encoded.push_back(encode_sequence(model, seq));

  const SmoothObjective objective = [&](std::span<const double> x, std::span<double> grad) {
    model.set_weights(x);
    auto value = nll_and_gradient(model, encoded, config.l2, config.threads);
    std::copy(value.gradient.begin(), value.gradient.end(), grad.begin());
    return value.value;
  };

  TrainResult result;
  std::vector<double> best_weights;
  std::optional<double> best_score;
  std::size_t best_iteration = 0;
  std::size_t last_scored = 0;

  auto score_snapshot = [&](std::size_t iteration, std::span<const double> x, IterationLog& entry) {
    model.set_weights(x);
    const double s = validator(model);
    entry.validation = s;
    last_scored = iteration;
    if (!best_score || s > *best_score) {
      best_score = s;
      best_iteration = iteration;
      best_weights.assign(x.begin(), x.end());
    }
  };

  OwlqnOptions opt;
  opt.l1 = config.l1;
  opt.memory = config.memory;
  opt.max_iterations = config.max_iterations;
  opt.tolerance = config.tolerance;

  const OwlqnCallback on_step = [&](const OwlqnStep& step, std::span<const double> x) {
    IterationLog entry{step.iteration, step.objective, step.nonzero, std::nullopt};
    if (validator && (step.iteration % config.eval_every == 0)) score_snapshot(step.iteration, x, entry);
    // Each entry is reported once the next one arrives, so the last entry
    // carries its final validation score when observed.
    if (observer && !result.log.empty()) observer(result.log.back());
    result.log.push_back(entry);
  };

  OwlqnResult opt_result =
      minimize_owlqn(objective, std::vector<double>(model.num_weights(), 0.0), opt, on_step);

  if (validator && (result.log.empty() || last_scored != opt_result.iterations)) {
    // Score the final point too; it is the last logged iteration (or the
    // untrained start when no step was accepted).
    if (result.log.empty()) {
      IterationLog entry{0, opt_result.initial_objective, 0, std::nullopt};
      score_snapshot(0, opt_result.x, entry);
      result.log.push_back(entry);
    } else {
      IterationLog& entry = result.log.back();
      score_snapshot(entry.iteration, opt_result.x, entry);
    }
  }
  if (observer && !result.log.empty()) observer(result.log.back());

  result.initial_objective = opt_result.initial_objective;
  result.final_objective = opt_result.objective;
  if (validator) {
    model.set_weights(best_weights);
    result.selected_iteration = best_iteration;
    result.selected_validation = best_score;
  } else {
    model.set_weights(opt_result.x);
    result.selected_iteration = opt_result.iterations;
  }
  model.validate();
  result.model = std::move(model);
  return result;
}

Decoded viterbi(const CrfModel& model, std::span<const FeatureVector> features) {
  return viterbi(score_lattice(model, features));
}

std::vector<std::string> tag(const CrfModel& model, std::span<const FeatureVector> features) {
  const auto decoded = viterbi(model, features);
  std::vector<std::string> out;
  out.reserve(decoded.labels.size());
  for (auto y : decoded.labels) out.push_back(model.labels[y]);
  return out;
}

}  // namespace pert
