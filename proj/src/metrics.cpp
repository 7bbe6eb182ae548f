#include "pert/metrics.hpp"

#include <algorithm>
#include <map>
#include <unordered_set>

#include "pert/error.hpp"

namespace pert {

ConfusionTable::ConfusionTable(std::vector<std::string> tags) : tags_(std::move(tags)) {
  std::unordered_set<std::string_view> seen;
  for (const auto& t : tags_) {
    if (!seen.insert(t).second) throw UsageError("tag set repeats '" + t + "'");
  }
  counts_.assign(tags_.size() * tags_.size(), 0);
}

std::optional<std::size_t> ConfusionTable::index(std::string_view tag) const {
  for (std::size_t i = 0; i < tags_.size(); ++i) {
    if (tags_[i] == tag) return i;
  }
  return std::nullopt;
}

std::uint64_t ConfusionTable::total() const noexcept {
  std::uint64_t n = 0;
  for (auto c : counts_) n += c;
  return n;
}

std::uint64_t ConfusionTable::trace() const noexcept {
  std::uint64_t n = 0;
  for (std::size_t i = 0; i < size(); ++i) n += at(i, i);
  return n;
}

std::uint64_t ConfusionTable::gold_count(std::size_t tag) const {
  std::uint64_t n = 0;
  for (std::size_t p = 0; p < size(); ++p) n += at(tag, p);
  return n;
}

std::uint64_t ConfusionTable::pred_count(std::size_t tag) const {
  std::uint64_t n = 0;
  for (std::size_t g = 0; g < size(); ++g) n += at(g, tag);
  return n;
}

ConfusionTable confusion(const TagSequences& gold, const TagSequences& pred,
                         std::vector<std::string> tagset) {
  ConfusionTable table(std::move(tagset));
  if (gold.size() != pred.size()) {
    throw DataError("gold has " + std::to_string(gold.size()) + " sentences, predictions " +
                    std::to_string(pred.size()));
  }
  std::map<std::string_view, std::size_t> ids;
  for (std::size_t i = 0; i < table.size(); ++i) ids.emplace(table.tags()[i], i);
  auto lookup = [&](const std::string& tag, std::size_t sentence) {
    const auto it = ids.find(tag);
    if (it == ids.end()) {
      throw DataError("sentence " + std::to_string(sentence) + ": tag '" + tag + "' not in tag set");
    }
    return it->second;
  };
  for (std::size_t s = 0; s < gold.size(); ++s) {
    if (gold[s].size() != pred[s].size()) {
      throw DataError("sentence " + std::to_string(s) + ": gold length " +
                      std::to_string(gold[s].size()) + " != predicted length " +
                      std::to_string(pred[s].size()));
    }
    for (std::size_t t = 0; t < gold[s].size(); ++t) table.add(lookup(gold[s][t], s), lookup(pred[s][t], s));
  }
  return table;
}

double f1_score(double precision, double recall) {
  const double sum = precision + recall;
  return sum > 0.0 ? 2.0 * precision * recall / sum : 0.0;
}

namespace {

double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

Metrics one_vs_rest(const ConfusionTable& table, std::size_t tag) {
  const auto tp = table.at(tag, tag);
  Metrics m;
  m.precision = ratio(tp, table.pred_count(tag));
  m.recall = ratio(tp, table.gold_count(tag));
  m.f1 = f1_score(m.precision, m.recall);
  m.accuracy = ratio(table.trace(), table.total());
  return m;
}

}  // namespace

Metrics binary_metrics(const ConfusionTable& table, std::string_view positive) {
  if (table.size() != 2) throw UsageError("binary metrics need exactly two tags");
  const auto pos = table.index(positive);
  if (!pos) throw UsageError("positive tag '" + std::string(positive) + "' not in tag set");
  return one_vs_rest(table, *pos);
}

std::vector<TagScore> per_tag_scores(const ConfusionTable& table) {
  std::vector<TagScore> out;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (table.gold_count(i) == 0 && table.pred_count(i) == 0) continue;
    auto m = one_vs_rest(table, i);
    m.accuracy = 0.0;
    out.push_back(TagScore{table.tags()[i], m, table.gold_count(i)});
  }
  return out;
}

Metrics macro_metrics(const ConfusionTable& table) {
  Metrics m;
  const auto scores = per_tag_scores(table);
  for (const auto& s : scores) {
    m.precision += s.metrics.precision;
    m.recall += s.metrics.recall;
    m.f1 += s.metrics.f1;
  }
  if (!scores.empty()) {
    const auto n = static_cast<double>(scores.size());
    m.precision /= n;
    m.recall /= n;
    m.f1 /= n;
  }
  m.accuracy = ratio(table.trace(), table.total());
  return m;
}

PosBreakdown ezafe_f1_per_pos(const FlagSequences& gold_ezafe, const FlagSequences& pred_ezafe,
                              const TagSequences& gold_pos) {
  if (gold_ezafe.size() != pred_ezafe.size() || gold_ezafe.size() != gold_pos.size()) {
    throw DataError("ezafe and POS sequences cover different numbers of sentences");
  }
  struct Counts {
    std::uint64_t tp = 0, fp = 0, fn = 0;
  };
  std::map<std::string, Counts> buckets;
  for (std::size_t s = 0; s < gold_ezafe.size(); ++s) {
    const auto n = gold_ezafe[s].size();
    if (pred_ezafe[s].size() != n || gold_pos[s].size() != n) {
      throw DataError("sentence " + std::to_string(s) + ": sequence lengths differ");
    }
    for (std::size_t t = 0; t < n; ++t) {
      auto& c = buckets[gold_pos[s][t]];
      const bool g = gold_ezafe[s][t] != 0, p = pred_ezafe[s][t] != 0;
      if (g && p) ++c.tp;
      if (!g && p) ++c.fp;
      if (g && !p) ++c.fn;
    }
  }
  PosBreakdown out;
  for (const auto& [pos, c] : buckets) {
    if (c.tp + c.fn == 0 && c.tp + c.fp == 0) continue;
    out.f1.emplace_back(pos, f1_score(ratio(c.tp, c.tp + c.fp), ratio(c.tp, c.tp + c.fn)));
  }
  std::stable_sort(out.f1.begin(), out.f1.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  double sum = 0.0;
  for (const auto& [pos, f] : out.f1) sum += f;
  out.unweighted_mean = out.f1.empty() ? 0.0 : sum / static_cast<double>(out.f1.size());
  return out;
}

ScoreMap delta_report(const ScoreMap& before, const ScoreMap& after) {
  std::map<std::string, double> b(before.begin(), before.end());
  std::map<std::string, double> a(after.begin(), after.end());
  if (b.size() != before.size() || a.size() != after.size()) {
    throw DataError("score maps contain repeated tags");
  }
  ScoreMap out;
  for (const auto& [tag, value] : a) {
    const auto it = b.find(tag);
    if (it == b.end()) throw DataError("tag '" + tag + "' missing from the baseline scores");
    out.emplace_back(tag, value - it->second);
  }
  if (a.size() != b.size()) throw DataError("baseline scores have tags the comparison lacks");
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& x, const auto& y) { return x.second > y.second; });
  return out;
}

}  // namespace pert
