#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pert {

using TagSequences = std::vector<std::vector<std::string>>;
using FlagSequences = std::vector<std::vector<std::uint8_t>>;

/// Token counts indexed by (gold, predicted) over a declared tag set.
class ConfusionTable {
 public:
  explicit ConfusionTable(std::vector<std::string> tags);

  const std::vector<std::string>& tags() const noexcept { return tags_; }
  std::size_t size() const noexcept { return tags_.size(); }
  std::optional<std::size_t> index(std::string_view tag) const;

  std::uint64_t at(std::size_t gold, std::size_t pred) const { return counts_[gold * size() + pred]; }
  void add(std::size_t gold, std::size_t pred, std::uint64_t n = 1) { counts_[gold * size() + pred] += n; }

  std::uint64_t total() const noexcept;
  std::uint64_t trace() const noexcept;
  std::uint64_t gold_count(std::size_t tag) const;
  std::uint64_t pred_count(std::size_t tag) const;

 private:
  std::vector<std::string> tags_;
  std::vector<std::uint64_t> counts_;
};

/// Throws DataError naming the sentence on length mismatch or unknown tag.
ConfusionTable confusion(const TagSequences& gold, const TagSequences& pred,
                         std::vector<std::string> tagset);

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
};

/// 2PR / (P + R), or 0 when P + R is 0.
double f1_score(double precision, double recall);

/// Positive-class precision/recall/F1; accuracy over all tokens.
Metrics binary_metrics(const ConfusionTable& table, std::string_view positive);

/// Unweighted mean of one-vs-rest measures over tags seen in gold or
/// predictions; accuracy over all tokens.
Metrics macro_metrics(const ConfusionTable& table);

struct TagScore {
  std::string tag;
  Metrics metrics;  // accuracy unused
  std::uint64_t support = 0;
};

/// One-vs-rest scores for every tag seen in gold or predictions, in table order.
std::vector<TagScore> per_tag_scores(const ConfusionTable& table);

struct PosBreakdown {
  std::vector<std::pair<std::string, double>> f1;  // sorted by descending F1, then tag
  double unweighted_mean = 0.0;
};

/// Positive-class ezafe F1 inside each gold-POS bucket. Buckets with no gold
/// and no predicted positives are left out.
PosBreakdown ezafe_f1_per_pos(const FlagSequences& gold_ezafe, const FlagSequences& pred_ezafe,
                              const TagSequences& gold_pos);

using ScoreMap = std::vector<std::pair<std::string, double>>;

/// after - before per tag, sorted by descending delta then tag. Throws
/// DataError when the key sets differ.
ScoreMap delta_report(const ScoreMap& before, const ScoreMap& after);

}  // namespace pert
