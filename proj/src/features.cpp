#include "pert/features.hpp"

#include "pert/error.hpp"
#include "pert/utf8.hpp"

namespace pert {

std::string template_name(const FeatureTemplate& t) {
  std::string name = t.id == TemplateId::Crf1 ? "CRF1" : "CRF2";
  if (t.ezafe_input) name += "+EZ";
  return name;
}

std::optional<FeatureTemplate> parse_template_name(std::string_view name) {
  FeatureTemplate t;
  if (name.ends_with("+EZ")) {
    t.ezafe_input = true;
    name.remove_suffix(3);
  }
  if (name == "CRF1") {
    t.id = TemplateId::Crf1;
  } else if (name == "CRF2") {
    t.id = TemplateId::Crf2;
  } else {
    return std::nullopt;
  }
  return t;
}

FeatureVector extract_features(std::span<const std::string> forms, std::size_t position,
                               const FeatureTemplate& tmpl,
                               std::optional<std::span<const std::uint8_t>> ezafe) {
  const std::size_t n = forms.size();
  if (position >= n) {
    throw UsageError("feature position " + std::to_string(position) +
                     " out of range for sentence of length " + std::to_string(n));
  }
  if (tmpl.ezafe_input != ezafe.has_value()) {
    throw UsageError(tmpl.ezafe_input ? "template requires ezafe flags"
                                      : "template does not take ezafe flags");
  }
  if (ezafe && ezafe->size() != n) {
    throw UsageError("ezafe flags length " + std::to_string(ezafe->size()) +
                     " does not match sentence length " + std::to_string(n));
  }

  const int w = tmpl.window;
  const auto at = static_cast<long>(position);
  FeatureVector out;
  out.reserve(2 * w + 1 + (tmpl.id == TemplateId::Crf2 ? 8 : 0) +
              (tmpl.ezafe_input ? 2 * w + 1 : 0));

  for (int k = -w; k <= w; ++k) {
    const long j = at + k;
    std::string key = "w[" + std::to_string(k) + "]=";
    if (j < 0) {
      key += kBosForm;
    } else if (j >= static_cast<long>(n)) {
      key += kEosForm;
    } else {
      key += forms[static_cast<std::size_t>(j)];
    }
    out.push_back(std::move(key));
  }

  if (tmpl.id == TemplateId::Crf2) {
    const std::string& focus = forms[position];
    const std::size_t len = utf8::length(focus);
    for (std::size_t k = 1; k <= 3; ++k) {
      if (len >= k) out.push_back("pre" + std::to_string(k) + "=" + std::string(utf8::prefix(focus, k)));
    }
    for (std::size_t k = 1; k <= 3; ++k) {
      if (len >= k) out.push_back("suf" + std::to_string(k) + "=" + std::string(utf8::suffix(focus, k)));
    }
    if (position == 0) out.emplace_back("BOS");
    if (position + 1 == n) out.emplace_back("EOS");
  }

  if (ezafe) {
    for (int k = -w; k <= w; ++k) {
      const long j = at + k;
      std::string key = "ez[" + std::to_string(k) + "]=";
      if (j < 0 || j >= static_cast<long>(n)) {
        key += '_';
      } else {
        key += (*ezafe)[static_cast<std::size_t>(j)] ? '1' : '0';
      }
      out.push_back(std::move(key));
    }
  }
  return out;
}

FeatureVector extract_features(const Sentence& sentence, std::size_t position,
                               const FeatureTemplate& tmpl,
                               std::optional<std::span<const std::uint8_t>> ezafe) {
  const auto forms = sentence.forms();
  return extract_features(forms, position, tmpl, ezafe);
}

std::vector<FeatureVector> extract_sentence(std::span<const std::string> forms,
                                            const FeatureTemplate& tmpl,
                                            std::optional<std::span<const std::uint8_t>> ezafe) {
  std::vector<FeatureVector> out;
  out.reserve(forms.size());
  for (std::size_t i = 0; i < forms.size(); ++i) {
    out.push_back(extract_features(forms, i, tmpl, ezafe));
  }
  return out;
}

FeatureIndex::FeatureIndex(std::vector<std::string> names) : names_(std::move(names)) {
  ids_.reserve(names_.size());
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!ids_.emplace(names_[i], static_cast<std::uint32_t>(i)).second) {
      throw DataError("duplicate feature '" + names_[i] + "'");
    }
  }
}

std::optional<std::uint32_t> FeatureIndex::find(std::string_view key) const {
  const auto it = ids_.find(key);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::uint32_t> FeatureIndex::encode(const FeatureVector& features) const {
  std::vector<std::uint32_t> ids;
  ids.reserve(features.size());
  for (const auto& f : features) {
    if (const auto id = find(f)) ids.push_back(*id);
  }
  return ids;
}

FeatureIndex build_feature_index(std::span<const std::vector<FeatureVector>> sentences,
                                 std::size_t min_count) {
  std::unordered_map<std::string_view, std::size_t> counts;
  std::vector<std::string_view> order;
  for (const auto& sentence : sentences) {
    for (const auto& position : sentence) {
      for (const auto& key : position) {
        auto [it, inserted] = counts.try_emplace(key, 0);
        if (inserted) order.push_back(key);
        ++it->second;
      }
    }
  }
  std::vector<std::string> kept;
  kept.reserve(order.size());
  for (const auto key : order) {
    if (counts[key] >= min_count) kept.emplace_back(key);
  }
  return FeatureIndex(std::move(kept));
}

FeatureIndex build_feature_index(const Corpus& corpus, const FeatureTemplate& tmpl,
                                 std::size_t min_count) {
  if (corpus.empty()) throw UsageError("cannot index features of an empty corpus");
  std::vector<std::vector<FeatureVector>> all;
  all.reserve(corpus.size());
  for (const auto& s : corpus.sentences()) {
    const auto forms = s.forms();
    if (tmpl.ezafe_input) {
      const auto flags = s.ezafe_flags();
      all.push_back(extract_sentence(forms, tmpl, std::span<const std::uint8_t>(flags)));
    } else {
      all.push_back(extract_sentence(forms, tmpl));
    }
  }
  return build_feature_index(all, min_count);
}

}  // namespace pert
