#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pert/metrics.hpp"

namespace pert {

/// Scores for one evaluated split.
struct EvalSection {
  std::string name;   // e.g. "valid", "test"
  std::string task;   // "ezafe" or "pos"
  bool binary = false;  // positive-class measures rather than macro averages
  Metrics metrics;
  std::vector<TagScore> per_tag;
  std::optional<PosBreakdown> ezafe_per_pos;
};

/// Evaluation results rendered as a text document and as JSON from the same
/// values. Numbers in the text form are fixed at 4 decimals.
struct EvalReport {
  std::vector<std::pair<std::string, std::string>> header;
  std::vector<EvalSection> sections;
  std::optional<ScoreMap> delta;

  const EvalSection* find(const std::string& name, const std::string& task) const;

  std::string to_text() const;
  std::string to_json() const;
};

}  // namespace pert
