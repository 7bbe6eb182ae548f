#include "pert/tasks.hpp"

#include <algorithm>
#include <unordered_set>

#include "pert/error.hpp"
#include "pert/text.hpp"

namespace pert {

std::string task_name(Task task) {
  switch (task) {
    case Task::Ezafe: return "ezafe";
    case Task::Pos: return "pos";
    case Task::PosEzInput: return "pos-ez-input";
    case Task::Joint: return "joint";
  }
  return "?";
}

std::optional<Task> parse_task(std::string_view name) {
  if (name == "ezafe") return Task::Ezafe;
  if (name == "pos") return Task::Pos;
  if (name == "pos-ez-input") return Task::PosEzInput;
  if (name == "joint") return Task::Joint;
  return std::nullopt;
}

std::string ezafe_mode_name(EzafeMode mode) {
  switch (mode) {
    case EzafeMode::None: return "none";
    case EzafeMode::Gold: return "gold";
    case EzafeMode::Predicted: return "predicted";
  }
  return "?";
}

std::string joint_label(std::string_view pos, std::uint8_t ezafe) {
  return std::string(pos) + (ezafe ? "|1" : "|0");
}

std::pair<std::string, std::uint8_t> split_joint_label(std::string_view label) {
  const auto bar = label.rfind('|');
  if (bar == std::string_view::npos || bar + 2 != label.size() ||
      (label[bar + 1] != '0' && label[bar + 1] != '1')) {
    throw DataError("'" + std::string(label) + "' is not a joint label");
  }
  return {std::string(label.substr(0, bar)), static_cast<std::uint8_t>(label[bar + 1] == '1')};
}

Task infer_task(const CrfModel& model) {
  if (model.tmpl.ezafe_input) return Task::PosEzInput;
  bool joint = true;
  for (const auto& l : model.labels) joint = joint && l.find('|') != std::string::npos;
  if (joint) return Task::Joint;
  const bool binary = model.labels.size() <= 2 && std::all_of(model.labels.begin(), model.labels.end(), [](const std::string& l) {
    return l == kEzafe || l == kNoEzafe;
  });
  return binary ? Task::Ezafe : Task::Pos;
}

namespace {

std::vector<FeatureVector> features_for(const std::vector<std::string>& forms, const FeatureTemplate& tmpl,
                                        const std::vector<std::uint8_t>* flags) {
  if (tmpl.ezafe_input) {
    if (!flags) throw UsageError("template " + template_name(tmpl) + " needs ezafe flags");
    return extract_sentence(forms, tmpl, std::span<const std::uint8_t>(*flags));
  }
  return extract_sentence(forms, tmpl);
}

std::vector<std::vector<std::string>> all_forms(const Corpus& corpus) {
  std::vector<std::vector<std::string>> out;
  out.reserve(corpus.size());
  for (const auto& s : corpus.sentences()) out.push_back(s.forms());
  return out;
}

void check_flags(const FlagSequences* ezafe, std::size_t n_sentences) {
  if (ezafe && ezafe->size() != n_sentences) {
    throw DataError("ezafe annotation covers " + std::to_string(ezafe->size()) + " sentences, corpus has " +
                    std::to_string(n_sentences));
  }
}

}  // namespace

std::vector<LabeledSequence> ezafe_sequences(const Corpus& corpus, const FeatureTemplate& tmpl) {
  if (tmpl.ezafe_input) throw UsageError("an ezafe recognizer cannot take ezafe input");
  std::vector<LabeledSequence> out;
  out.reserve(corpus.size());
  for (const auto& s : corpus.sentences()) {
    LabeledSequence seq;
    seq.features = extract_sentence(s.forms(), tmpl);
    for (const auto& t : s.tokens) seq.labels.emplace_back(t.ezafe ? kEzafe : kNoEzafe);
    out.push_back(std::move(seq));
  }
  return out;
}

std::vector<LabeledSequence> pos_sequences(const Corpus& corpus, const FeatureTemplate& tmpl,
                                           const FlagSequences* ezafe) {
  check_flags(ezafe, corpus.size());
  std::vector<LabeledSequence> out;
  out.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& s = corpus.sentences()[i];
    out.push_back(LabeledSequence{features_for(s.forms(), tmpl, ezafe ? &(*ezafe)[i] : nullptr), s.tags()});
  }
  return out;
}

std::vector<LabeledSequence> joint_sequences(const Corpus& corpus, const FeatureTemplate& tmpl) {
  if (tmpl.ezafe_input) throw UsageError("a joint tagger cannot take ezafe input");
  std::vector<LabeledSequence> out;
  out.reserve(corpus.size());
  for (const auto& s : corpus.sentences()) {
    LabeledSequence seq;
    seq.features = extract_sentence(s.forms(), tmpl);
    for (const auto& t : s.tokens) seq.labels.push_back(joint_label(t.pos, t.ezafe));
    out.push_back(std::move(seq));
  }
  return out;
}

FlagSequences gold_ezafe(const Corpus& corpus) {
  FlagSequences out;
  out.reserve(corpus.size());
  for (const auto& s : corpus.sentences()) out.push_back(s.ezafe_flags());
  return out;
}

TagSequences gold_pos(const Corpus& corpus) {
  TagSequences out;
  out.reserve(corpus.size());
  for (const auto& s : corpus.sentences()) out.push_back(s.tags());
  return out;
}

TagSequences predict_tags(const CrfModel& model, const std::vector<std::vector<std::string>>& sentences,
                          const FlagSequences* ezafe) {
  check_flags(ezafe, sentences.size());
  TagSequences out;
  out.reserve(sentences.size());
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (sentences[i].empty()) {
      out.emplace_back();
      continue;
    }
    const auto features = features_for(sentences[i], model.tmpl, ezafe ? &(*ezafe)[i] : nullptr);
    out.push_back(tag(model, features));
  }
  return out;
}

TagSequences predict_tags(const CrfModel& model, const Corpus& corpus, const FlagSequences* ezafe) {
  return predict_tags(model, all_forms(corpus), ezafe);
}

FlagSequences predict_ezafe(const CrfModel& ezafe_model, const std::vector<std::vector<std::string>>& sentences) {
  if (infer_task(ezafe_model) != Task::Ezafe) {
    throw UsageError("model with template " + template_name(ezafe_model.tmpl) + " is not an ezafe recognizer");
  }
  const auto tags = predict_tags(ezafe_model, sentences);
  FlagSequences out;
  out.reserve(tags.size());
  for (const auto& s : tags) {
    std::vector<std::uint8_t> flags;
    flags.reserve(s.size());
    for (const auto& t : s) flags.push_back(t == kEzafe ? 1 : 0);
    out.push_back(std::move(flags));
  }
  return out;
}

FlagSequences predict_ezafe(const CrfModel& ezafe_model, const Corpus& corpus) {
  return predict_ezafe(ezafe_model, all_forms(corpus));
}

EvalSection evaluate_ezafe(const FlagSequences& gold, const FlagSequences& pred, const Corpus& corpus,
                           std::string name) {
  auto as_tags = [](const FlagSequences& flags) {
    TagSequences out;
    out.reserve(flags.size());
    for (const auto& s : flags) {
      std::vector<std::string> tags;
      tags.reserve(s.size());
      for (auto f : s) tags.emplace_back(f ? kEzafe : kNoEzafe);
      out.push_back(std::move(tags));
    }
    return out;
  };
  const auto table = confusion(as_tags(gold), as_tags(pred), {std::string(kNoEzafe), std::string(kEzafe)});
  EvalSection section;
  section.name = std::move(name);
  section.task = "ezafe";
  section.binary = true;
  section.metrics = binary_metrics(table, kEzafe);
  section.per_tag = per_tag_scores(table);
  section.ezafe_per_pos = ezafe_f1_per_pos(gold, pred, gold_pos(corpus));
  return section;
}

EvalSection evaluate_pos(const TagSequences& gold, const TagSequences& pred,
                         const std::vector<std::string>& model_tags, std::string name) {
  std::vector<std::string> tagset = model_tags;
  std::unordered_set<std::string> known(tagset.begin(), tagset.end());
  for (const auto& s : gold) {
    for (const auto& t : s) {
      if (known.insert(t).second) tagset.push_back(t);
    }
  }
  const auto table = confusion(gold, pred, std::move(tagset));
  EvalSection section;
  section.name = std::move(name);
  section.task = "pos";
  section.metrics = macro_metrics(table);
  section.per_tag = per_tag_scores(table);
  return section;
}

ScoreMap f1_by_tag(const EvalSection& section) {
  ScoreMap out;
  for (const auto& t : section.per_tag) out.emplace_back(t.tag, t.metrics.f1);
  return out;
}

namespace {

void add_config_header(EvalReport& report, Task task, const FeatureTemplate& tmpl, const TrainConfig& config,
                       const TrainResult& training) {
  report.header.emplace_back("task", task_name(task));
  report.header.emplace_back("template", template_name(tmpl));
  report.header.emplace_back("l1", text::shortest(config.l1));
  report.header.emplace_back("l2", text::shortest(config.l2));
  report.header.emplace_back("max_iter", std::to_string(config.max_iterations));
  report.header.emplace_back("iterations", std::to_string(training.log.empty() ? 0 : training.log.back().iteration));
  report.header.emplace_back("selected_iteration", std::to_string(training.selected_iteration));
  report.header.emplace_back("features", std::to_string(training.model.num_features()));
  report.header.emplace_back("labels", std::to_string(training.model.num_labels()));
}

}  // namespace

RunResult run_ezafe(const ExperimentData& data, FeatureTemplate tmpl, const TrainConfig& config,
                    const IterationObserver& observer) {
  if (data.train.empty()) throw DataError("ezafe training split is empty");
  tmpl.ezafe_input = false;
  const auto train_data = ezafe_sequences(data.train, tmpl);

  Validator validator;
  FlagSequences valid_gold;
  if (!data.valid.empty()) {
    valid_gold = gold_ezafe(data.valid);
    validator = [&](const CrfModel& model) {
      const auto pred = predict_ezafe(model, data.valid);
      return evaluate_ezafe(valid_gold, pred, data.valid, "valid").metrics.f1;
    };
  }

  RunResult result;
  result.training = train(train_data, tmpl, config, validator, observer,
                          {std::string(kNoEzafe), std::string(kEzafe)});
  const CrfModel& model = result.training.model;
  add_config_header(result.report, Task::Ezafe, tmpl, config, result.training);
  for (const auto* split : {&data.valid, &data.test}) {
    if (split->empty()) continue;
    const std::string name = split == &data.valid ? "valid" : "test";
    result.report.sections.push_back(
        evaluate_ezafe(gold_ezafe(*split), predict_ezafe(model, *split), *split, name));
  }
  return result;
}

RunResult run_pos(const ExperimentData& data, FeatureTemplate tmpl, const TrainConfig& config,
                  EzafeMode mode, const CrfModel* ezafe_model, const IterationObserver& observer) {
  if (data.train.empty()) throw DataError("POS training split is empty");
  if (mode == EzafeMode::Predicted && !ezafe_model) {
    throw UsageError("predicted ezafe input needs a trained ezafe model");
  }
  tmpl.ezafe_input = mode != EzafeMode::None;

  auto flags_for = [&](const Corpus& c) -> std::optional<FlagSequences> {
    switch (mode) {
      case EzafeMode::None: return std::nullopt;
      case EzafeMode::Gold: return gold_ezafe(c);
      case EzafeMode::Predicted: return predict_ezafe(*ezafe_model, c);
    }
    return std::nullopt;
  };
  const auto train_flags = flags_for(data.train);
  const auto valid_flags = flags_for(data.valid);
  const auto test_flags = flags_for(data.test);
  auto ptr = [](const std::optional<FlagSequences>& f) { return f ? &*f : nullptr; };

  const auto train_data = pos_sequences(data.train, tmpl, ptr(train_flags));
  Validator validator;
  TagSequences valid_gold;
  if (!data.valid.empty()) {
    valid_gold = gold_pos(data.valid);
    validator = [&](const CrfModel& model) {
      const auto pred = predict_tags(model, data.valid, ptr(valid_flags));
      return evaluate_pos(valid_gold, pred, model.labels, "valid").metrics.f1;
    };
  }

  RunResult result;
  result.training = train(train_data, tmpl, config, validator, observer, data.train.tag_inventory());
  const CrfModel& model = result.training.model;
  add_config_header(result.report, tmpl.ezafe_input ? Task::PosEzInput : Task::Pos, tmpl, config, result.training);
  result.report.header.emplace_back("ezafe_source", ezafe_mode_name(mode));
  if (!data.valid.empty()) {
    result.report.sections.push_back(
        evaluate_pos(valid_gold, predict_tags(model, data.valid, ptr(valid_flags)), model.labels, "valid"));
  }
  if (!data.test.empty()) {
    result.report.sections.push_back(evaluate_pos(gold_pos(data.test), predict_tags(model, data.test, ptr(test_flags)),
                                                  model.labels, "test"));
  }
  return result;
}

namespace {

std::vector<std::string> pos_projection_tags(const CrfModel& joint_model) {
  std::vector<std::string> tags;
  std::unordered_set<std::string> seen;
  for (const auto& l : joint_model.labels) {
    auto [pos, ez] = split_joint_label(l);
    if (seen.insert(pos).second) tags.push_back(pos);
  }
  return tags;
}

void project(const TagSequences& joint, TagSequences& pos, FlagSequences& ezafe) {
  pos.clear();
  ezafe.clear();
  for (const auto& s : joint) {
    std::vector<std::string> p;
    std::vector<std::uint8_t> e;
    for (const auto& l : s) {
      auto [tag, flag] = split_joint_label(l);
      p.push_back(std::move(tag));
      e.push_back(flag);
    }
    pos.push_back(std::move(p));
    ezafe.push_back(std::move(e));
  }
}

}  // namespace

RunResult run_joint(const ExperimentData& data, FeatureTemplate tmpl, const TrainConfig& config,
                    const IterationObserver& observer) {
  if (data.train.empty()) throw DataError("joint training split is empty");
  tmpl.ezafe_input = false;
  const auto train_data = joint_sequences(data.train, tmpl);

  Validator validator;
  TagSequences valid_gold;
  if (!data.valid.empty()) {
    valid_gold = gold_pos(data.valid);
    validator = [&](const CrfModel& model) {
      TagSequences pos;
      FlagSequences ez;
      project(predict_tags(model, data.valid), pos, ez);
      return evaluate_pos(valid_gold, pos, pos_projection_tags(model), "valid").metrics.f1;
    };
  }

  RunResult result;
  result.training = train(train_data, tmpl, config, validator, observer);
  const CrfModel& model = result.training.model;
  add_config_header(result.report, Task::Joint, tmpl, config, result.training);
  for (const auto* split : {&data.valid, &data.test}) {
    if (split->empty()) continue;
    for (auto& section : evaluate_model(model, *split, split == &data.valid ? "valid" : "test")) {
      result.report.sections.push_back(std::move(section));
    }
  }
  return result;
}

std::vector<EvalSection> evaluate_model(const CrfModel& model, const Corpus& corpus, const std::string& name,
                                        const CrfModel* ezafe_model) {
  switch (infer_task(model)) {
    case Task::Ezafe:
      return {evaluate_ezafe(gold_ezafe(corpus), predict_ezafe(model, corpus), corpus, name)};
    case Task::Pos:
      return {evaluate_pos(gold_pos(corpus), predict_tags(model, corpus), model.labels, name)};
    case Task::PosEzInput: {
      const auto flags = ezafe_model ? predict_ezafe(*ezafe_model, corpus) : gold_ezafe(corpus);
      return {evaluate_pos(gold_pos(corpus), predict_tags(model, corpus, &flags), model.labels, name)};
    }
    case Task::Joint: {
      TagSequences pos;
      FlagSequences ez;
      project(predict_tags(model, corpus), pos, ez);
      return {evaluate_pos(gold_pos(corpus), pos, pos_projection_tags(model), name),
              evaluate_ezafe(gold_ezafe(corpus), ez, corpus, name)};
    }
  }
  return {};
}

Corpus pipeline_tag(const std::vector<std::vector<std::string>>& sentences, const CrfModel& ezafe_model,
                    const CrfModel& pos_model) {
  if (!pos_model.tmpl.ezafe_input) {
    throw UsageError("POS model template " + template_name(pos_model.tmpl) + " does not take ezafe input");
  }
  const auto flags = predict_ezafe(ezafe_model, sentences);
  const auto tags = predict_tags(pos_model, sentences, &flags);
  std::vector<Sentence> out;
  out.reserve(sentences.size());
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (sentences[i].empty()) continue;
    Sentence s;
    for (std::size_t t = 0; t < sentences[i].size(); ++t) {
      s.tokens.push_back(Token{sentences[i][t], tags[i][t], flags[i][t]});
    }
    out.push_back(std::move(s));
  }
  return Corpus::from_sentences(std::move(out));
}

}  // namespace pert
