#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pert/corpus.hpp"

namespace pert {

enum class TemplateId { Crf1, Crf2 };

/// CRF1: word identities in a +-window around the focus word.
/// CRF2: CRF1 plus 1..3-scalar prefixes/suffixes and sentence-boundary flags.
/// Either may additionally consume per-token ezafe flags (`ezafe_input`).
struct FeatureTemplate {
  TemplateId id = TemplateId::Crf1;
  int window = 5;
  bool ezafe_input = false;

  friend bool operator==(const FeatureTemplate&, const FeatureTemplate&) = default;
};

/// "CRF1", "CRF2", "CRF1+EZ", "CRF2+EZ".
std::string template_name(const FeatureTemplate& t);
/// Inverse of template_name; nullopt for unknown ids.
std::optional<FeatureTemplate> parse_template_name(std::string_view name);

using FeatureVector = std::vector<std::string>;
using EzafeFlags = std::vector<std::uint8_t>;

inline constexpr std::string_view kBosForm = "__BOS__";
inline constexpr std::string_view kEosForm = "__EOS__";

/// Feature keys active at `position`. `ezafe` must be given exactly when
/// the template has ezafe_input, with one flag per token.
FeatureVector extract_features(std::span<const std::string> forms, std::size_t position,
                               const FeatureTemplate& tmpl,
                               std::optional<std::span<const std::uint8_t>> ezafe = std::nullopt);

FeatureVector extract_features(const Sentence& sentence, std::size_t position,
                               const FeatureTemplate& tmpl,
                               std::optional<std::span<const std::uint8_t>> ezafe = std::nullopt);

/// Features for every position of one sentence.
std::vector<FeatureVector> extract_sentence(
    std::span<const std::string> forms, const FeatureTemplate& tmpl,
    std::optional<std::span<const std::uint8_t>> ezafe = std::nullopt);

/// Immutable bijection between feature strings and dense ids.
class FeatureIndex {
 public:
  FeatureIndex() = default;
  explicit FeatureIndex(std::vector<std::string> names);

  std::size_t size() const noexcept { return names_.size(); }
  std::optional<std::uint32_t> find(std::string_view key) const;
  const std::string& name(std::uint32_t id) const { return names_.at(id); }
  const std::vector<std::string>& names() const noexcept { return names_; }

  /// Ids of the known keys in `features`, in order; unknown keys are skipped.
  std::vector<std::uint32_t> encode(const FeatureVector& features) const;

  friend bool operator==(const FeatureIndex& a, const FeatureIndex& b) {
    return a.names_ == b.names_;
  }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t, Hash, std::equal_to<>> ids_;
};

/// Keeps features seen at least `min_count` times, numbered by first occurrence.
FeatureIndex build_feature_index(std::span<const std::vector<FeatureVector>> sentences,
                                 std::size_t min_count = 1);

/// Index over a corpus. For ezafe-input templates the corpus's gold flags
/// feed the ez[k] features.
FeatureIndex build_feature_index(const Corpus& corpus, const FeatureTemplate& tmpl,
                                 std::size_t min_count = 1);

}  // namespace pert
