#include "pert/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>

#include "pert/error.hpp"
#include "pert/io.hpp"
#include "pert/text.hpp"

namespace pert {

void ExperimentConfig::validate() const {
  train_config.validate();
  if (train_path.empty()) throw UsageError("experiment needs a 'train' corpus");
  if (out_dir.empty()) throw UsageError("experiment needs an 'out' directory");
  if (valid_path.empty() != test_path.empty()) {
    throw UsageError("give both 'valid' and 'test', or neither to split 'train'");
  }
  if (task == Task::PosEzInput && ezafe_source == EzafeMode::Predicted && ezafe_model_path.empty()) {
    throw UsageError("task pos-ez-input needs 'ezafe_model' (or ezafe_source = gold)");
  }
}

ExperimentConfig parse_experiment_config(std::string_view text) {
  ExperimentConfig config;
  std::size_t line_no = 0;
  for (auto raw : text::split(text, '\n')) {
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const auto line = text::trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected key = value");
    const std::string key(text::trim(line.substr(0, eq)));
    const std::string value(text::trim(line.substr(eq + 1)));
    for (const auto& [k, v] : config.entries) {
      if (k == key) throw ParseError(line_no, "key '" + key + "' repeated");
    }
    config.entries.emplace_back(key, value);

    auto number = [&]() {
      const auto v = text::parse_double(value);
      if (!v) throw ParseError(line_no, key + " must be a number");
      return *v;
    };
    auto count = [&]() {
      const auto v = text::parse_unsigned(value);
      if (!v) throw ParseError(line_no, key + " must be a non-negative integer");
      return *v;
    };

    if (key == "task") {
      const auto t = parse_task(value);
      if (!t) throw ParseError(line_no, "unknown task '" + value + "'");
      config.task = *t;
    } else if (key == "template") {
      std::string upper = value;
      std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
      const auto t = parse_template_name(upper);
      if (!t || t->ezafe_input) throw ParseError(line_no, "template must be crf1 or crf2");
      config.tmpl = *t;
    } else if (key == "l1") {
      config.train_config.l1 = number();
    } else if (key == "l2") {
      config.train_config.l2 = number();
    } else if (key == "max_iter") {
      config.train_config.max_iterations = count();
    } else if (key == "seed") {
      config.seed = count();
    } else if (key == "train") {
      config.train_path = value;
    } else if (key == "valid") {
      config.valid_path = value;
    } else if (key == "test") {
      config.test_path = value;
    } else if (key == "ezafe_model") {
      config.ezafe_model_path = value;
    } else if (key == "out") {
      config.out_dir = value;
    } else if (key == "ezafe_source") {
      if (value == "gold") {
        config.ezafe_source = EzafeMode::Gold;
      } else if (value == "predicted") {
        config.ezafe_source = EzafeMode::Predicted;
      } else {
        throw ParseError(line_no, "ezafe_source must be gold or predicted");
      }
    } else {
      throw ParseError(line_no, "unknown key '" + key + "'");
    }
  }
  config.validate();
  return config;
}

ExperimentOutcome run_experiment(const ExperimentConfig& config, const IterationObserver& observer) {
  config.validate();
  ExperimentData data;
  if (config.valid_path.empty()) {
    auto split = shuffle_split(read_corpus_file(config.train_path), SplitSpec{config.seed, 0.1, 0.1});
    data.train = std::move(split.train);
    data.valid = std::move(split.valid);
    data.test = std::move(split.test);
  } else {
    data.train = read_corpus_file(config.train_path);
    data.valid = read_corpus_file(config.valid_path);
    data.test = read_corpus_file(config.test_path);
  }
  data.train = filter_long(data.train, config.max_sentence_length);
  data.valid = filter_long(data.valid, config.max_sentence_length);
  data.test = filter_long(data.test, config.max_sentence_length);

  ExperimentOutcome outcome;
  switch (config.task) {
    case Task::Ezafe:
      outcome.run = run_ezafe(data, config.tmpl, config.train_config, observer);
      break;
    case Task::Pos:
      outcome.run = run_pos(data, config.tmpl, config.train_config, EzafeMode::None, nullptr, observer);
      break;
    case Task::PosEzInput: {
      std::optional<CrfModel> ezafe_model;
      if (config.ezafe_source == EzafeMode::Predicted) ezafe_model = load_model_file(config.ezafe_model_path);
      outcome.baseline = run_pos(data, config.tmpl, config.train_config, EzafeMode::None, nullptr, observer);
      outcome.run = run_pos(data, config.tmpl, config.train_config, config.ezafe_source,
                            ezafe_model ? &*ezafe_model : nullptr, observer);
      break;
    }
    case Task::Joint:
      outcome.run = run_joint(data, config.tmpl, config.train_config, observer);
      break;
  }

  EvalReport& report = outcome.report;
  report.header = config.entries;
  report.header.emplace_back("train_sentences", std::to_string(data.train.size()));
  report.header.emplace_back("valid_sentences", std::to_string(data.valid.size()));
  report.header.emplace_back("test_sentences", std::to_string(data.test.size()));
  for (const auto& kv : outcome.run.report.header) report.header.emplace_back("run." + kv.first, kv.second);
  report.sections = outcome.run.report.sections;
  if (outcome.baseline) {
    for (auto section : outcome.baseline->report.sections) {
      section.name = "baseline-" + section.name;
      report.sections.push_back(std::move(section));
    }
    const auto* before = outcome.baseline->report.find("test", "pos");
    const auto* after = outcome.run.report.find("test", "pos");
    if (before && after) report.delta = delta_report(f1_by_tag(*before), f1_by_tag(*after));
  }
  return outcome;
}

std::string format_training_log(const TrainResult& training) {
  std::string out = "iteration\tobjective\tnonzero\tvalid_f1\n";
  for (const auto& e : training.log) {
    out += std::to_string(e.iteration) + '\t' + text::shortest(e.objective) + '\t' + std::to_string(e.nonzero) +
           '\t' + (e.validation ? text::fixed(*e.validation, 6) : std::string("-")) + '\n';
  }
  out += "# selected iteration " + std::to_string(training.selected_iteration) + '\n';
  return out;
}

void write_experiment_outputs(const ExperimentConfig& config, const ExperimentOutcome& outcome) {
  namespace fs = std::filesystem;
  fs::create_directories(config.out_dir);
  const fs::path dir(config.out_dir);
  write_file_atomic((dir / "model.crf").string(), save_model(outcome.run.training.model));
  write_file_atomic((dir / "train.log").string(), format_training_log(outcome.run.training));
  if (outcome.baseline) {
    write_file_atomic((dir / "baseline.crf").string(), save_model(outcome.baseline->training.model));
    write_file_atomic((dir / "baseline.log").string(), format_training_log(outcome.baseline->training));
  }
  write_file_atomic((dir / "report.txt").string(), outcome.report.to_text());
  write_file_atomic((dir / "report.json").string(), outcome.report.to_json());
}

}  // namespace pert
