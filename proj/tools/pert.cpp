// pert: command-line front end for the ezafe / POS CRF toolkit.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "pert/corpus.hpp"
#include "pert/crf.hpp"
#include "pert/datagen.hpp"
#include "pert/error.hpp"
#include "pert/experiment.hpp"
#include "pert/io.hpp"
#include "pert/tasks.hpp"
#include "pert/text.hpp"

namespace fs = std::filesystem;
using namespace pert;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kTraining = 3 };

struct SplitArgs {
  std::string input;
  std::string out_dir;
  std::uint64_t seed = 17;
  double test = 0.1;
  double valid = 0.1;
};

struct StatsArgs {
  std::string input;
  std::string out;
};

struct SynthArgs {
  std::string spec;
  std::string preset;
  std::string dump_spec;
  std::string out;
  std::size_t sentences = 1000;
  std::uint64_t seed = 17;
  std::size_t min_len = 3;
  std::size_t max_len = 40;
  double stop = 0.1;
};

struct TrainArgs {
  std::string train;
  std::string valid;
  std::string task = "ezafe";
  std::string tmpl = "crf1";
  std::string ezafe_model;
  bool gold_ezafe = false;
  std::string out;
  std::string log;
  TrainConfig config;
  std::size_t max_len = 512;
};

struct TagArgs {
  std::string model;
  std::string input;
  std::string ezafe_model;
  std::string out;
};

struct EvalArgs {
  std::string model;
  std::string corpus;
  std::string ezafe_model;
  std::string report;
};

struct ExperimentArgs {
  std::string config;
};

FeatureTemplate template_arg(const std::string& name) {
  std::string upper;
  for (unsigned char c : name) upper.push_back(static_cast<char>(std::toupper(c)));
  const auto t = parse_template_name(upper);
  if (!t || t->ezafe_input) throw UsageError("--template must be crf1 or crf2, got '" + name + "'");
  return *t;
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
  } else {
    write_file_atomic(path, content);
  }
}

int cmd_split(const SplitArgs& a) {
  const Corpus corpus = read_corpus_file(a.input);
  const auto parts = shuffle_split(corpus, SplitSpec{a.seed, a.test, a.valid});
  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);
  write_file_atomic((dir / "train.tsv").string(), write_corpus(parts.train));
  write_file_atomic((dir / "valid.tsv").string(), write_corpus(parts.valid));
  write_file_atomic((dir / "test.tsv").string(), write_corpus(parts.test));
  std::cout << "split\tsentences\ttokens\n";
  for (const auto& [name, part] : {std::pair{"train", &parts.train}, std::pair{"valid", &parts.valid},
                                   std::pair{"test", &parts.test}, std::pair{"total", &corpus}}) {
    std::cout << name << '\t' << part->size() << '\t' << part->token_count() << '\n';
  }
  return kOk;
}

int cmd_stats(const StatsArgs& a) {
  emit(a.out, format_stats(corpus_stats(read_corpus_file(a.input))));
  return kOk;
}

int cmd_synth(const SynthArgs& a) {
  if (a.spec.empty() == a.preset.empty()) throw UsageError("give exactly one of --spec and --preset");
  const HmmSpec spec = a.spec.empty() ? preset_spec(a.preset) : read_hmm_spec_file(a.spec);
  const LengthModel lengths{a.min_len, a.max_len, a.stop};
  lengths.validate();
  if (!a.dump_spec.empty()) write_file_atomic(a.dump_spec, write_hmm_spec(spec));
  emit(a.out, write_corpus(generate(spec, a.sentences, lengths, a.seed)));
  return kOk;
}

int cmd_train(const TrainArgs& a) {
  const auto task = parse_task(a.task);
  if (!task) throw UsageError("unknown --task '" + a.task + "'");
  const FeatureTemplate tmpl = template_arg(a.tmpl);
  a.config.validate();
  if (*task == Task::PosEzInput && a.ezafe_model.empty() && !a.gold_ezafe) {
    throw UsageError("--task pos-ez-input needs --ezafe-model (or --gold-ezafe)");
  }
  if (*task != Task::PosEzInput && (!a.ezafe_model.empty() || a.gold_ezafe)) {
    throw UsageError("--ezafe-model and --gold-ezafe only apply to --task pos-ez-input");
  }

  ExperimentData data;
  data.train = filter_long(read_corpus_file(a.train), a.max_len);
  if (!a.valid.empty()) data.valid = filter_long(read_corpus_file(a.valid), a.max_len);

  std::optional<CrfModel> ezafe_model;
  if (!a.ezafe_model.empty()) ezafe_model = load_model_file(a.ezafe_model);

  RunResult run;
  switch (*task) {
    case Task::Ezafe: run = run_ezafe(data, tmpl, a.config); break;
    case Task::Pos: run = run_pos(data, tmpl, a.config, EzafeMode::None); break;
    case Task::PosEzInput:
      run = run_pos(data, tmpl, a.config, ezafe_model ? EzafeMode::Predicted : EzafeMode::Gold,
                    ezafe_model ? &*ezafe_model : nullptr);
      break;
    case Task::Joint: run = run_joint(data, tmpl, a.config); break;
  }

  write_file_atomic(a.out, save_model(run.training.model));
  write_file_atomic(a.log.empty() ? a.out + ".log" : a.log, format_training_log(run.training));
  std::cout << "model\t" << a.out << "\n"
            << "task\t" << task_name(*task) << "\n"
            << "template\t" << template_name(run.training.model.tmpl) << "\n"
            << "features\t" << run.training.model.num_features() << "\n"
            << "labels\t" << run.training.model.num_labels() << "\n"
            << "iterations\t" << (run.training.log.empty() ? 0 : run.training.log.back().iteration) << "\n"
            << "selected_iteration\t" << run.training.selected_iteration << "\n"
            << "objective\t" << text::shortest(run.training.final_objective) << "\n";
  if (run.training.selected_validation) {
    std::cout << "valid_score\t" << text::fixed(*run.training.selected_validation, 4) << "\n";
  }
  return kOk;
}

// One token per line, first column the word form; optional second and third
// columns carry POS and ezafe and are copied through when not predicted.
struct RawInput {
  std::vector<std::vector<std::string>> forms;
  std::vector<std::vector<std::string>> pos;
  std::vector<std::vector<std::uint8_t>> ezafe;
  bool has_pos = true;
  bool has_ezafe = true;
};

RawInput read_raw(const std::string& path) {
  const std::string content = path == "-" ? std::string(std::istreambuf_iterator<char>(std::cin), {}) : read_file(path);
  RawInput in;
  in.forms.emplace_back();
  in.pos.emplace_back();
  in.ezafe.emplace_back();
  std::size_t line_no = 0;
  for (auto line : text::split(content, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (text::trim(line).empty()) {
      if (!in.forms.back().empty()) {
        in.forms.emplace_back();
        in.pos.emplace_back();
        in.ezafe.emplace_back();
      }
      continue;
    }
    const auto cols = text::split(line, '\t');
    if (cols[0].empty()) throw ParseError(line_no, "empty word form");
    in.forms.back().emplace_back(cols[0]);
    in.has_pos = in.has_pos && cols.size() >= 2;
    in.has_ezafe = in.has_ezafe && cols.size() >= 3;
    in.pos.back().emplace_back(cols.size() >= 2 ? std::string(cols[1]) : "_");
    std::uint8_t flag = 0;
    if (cols.size() >= 3) {
      if (cols[2] != "0" && cols[2] != "1") throw ParseError(line_no, "ezafe column must be 0 or 1");
      flag = cols[2] == "1";
    }
    in.ezafe.back().push_back(flag);
  }
  if (in.forms.back().empty()) {
    in.forms.pop_back();
    in.pos.pop_back();
    in.ezafe.pop_back();
  }
  if (in.forms.empty()) {
    in.has_pos = false;
    in.has_ezafe = false;
  }
  return in;
}

int cmd_tag(const TagArgs& a) {
  const CrfModel model = load_model_file(a.model);
  std::optional<CrfModel> ezafe_model;
  if (!a.ezafe_model.empty()) ezafe_model = load_model_file(a.ezafe_model);
  RawInput in = read_raw(a.input);

  switch (infer_task(model)) {
    case Task::Ezafe:
      in.ezafe = predict_ezafe(model, in.forms);
      break;
    case Task::Pos:
      in.pos = predict_tags(model, in.forms);
      break;
    case Task::PosEzInput:
      if (ezafe_model) {
        in.ezafe = predict_ezafe(*ezafe_model, in.forms);
      } else if (!in.has_ezafe) {
        throw UsageError("model takes ezafe input: give --ezafe-model or an input ezafe column");
      }
      in.pos = predict_tags(model, in.forms, &in.ezafe);
      break;
    case Task::Joint: {
      const auto joint = predict_tags(model, in.forms);
      for (std::size_t i = 0; i < joint.size(); ++i) {
        for (std::size_t t = 0; t < joint[i].size(); ++t) {
          std::tie(in.pos[i][t], in.ezafe[i][t]) = split_joint_label(joint[i][t]);
        }
      }
      break;
    }
  }

  std::ostringstream out;
  for (std::size_t i = 0; i < in.forms.size(); ++i) {
    if (i) out << '\n';
    for (std::size_t t = 0; t < in.forms[i].size(); ++t) {
      out << in.forms[i][t] << '\t' << in.pos[i][t] << '\t' << (in.ezafe[i][t] ? '1' : '0') << '\n';
    }
  }
  emit(a.out, out.str());
  return kOk;
}

int cmd_eval(const EvalArgs& a) {
  const CrfModel model = load_model_file(a.model);
  std::optional<CrfModel> ezafe_model;
  if (!a.ezafe_model.empty()) ezafe_model = load_model_file(a.ezafe_model);
  if (ezafe_model && !model.tmpl.ezafe_input) {
    throw UsageError("--ezafe-model only applies to models that take ezafe input");
  }
  const Corpus corpus = read_corpus_file(a.corpus);

  EvalReport report;
  report.header = {{"model", a.model},
                   {"corpus", a.corpus},
                   {"task", task_name(infer_task(model))},
                   {"template", template_name(model.tmpl)},
                   {"sentences", std::to_string(corpus.size())},
                   {"tokens", std::to_string(corpus.token_count())}};
  if (model.tmpl.ezafe_input) report.header.emplace_back("ezafe_source", ezafe_model ? "predicted" : "gold");
  report.sections = evaluate_model(model, corpus, "eval", ezafe_model ? &*ezafe_model : nullptr);

  const std::string text = report.to_text();
  if (!a.report.empty()) {
    write_file_atomic(a.report + ".txt", text);
    write_file_atomic(a.report + ".json", report.to_json());
  }
  std::cout << text;
  return kOk;
}

int cmd_experiment(const ExperimentArgs& a) {
  const auto config = parse_experiment_config(read_file(a.config));
  const auto outcome = run_experiment(config);
  write_experiment_outputs(config, outcome);
  std::cout << outcome.report.to_text();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CRF toolkit for Persian ezafe recognition and POS tagging"};
  app.require_subcommand(1);

  SplitArgs split;
  auto* s = app.add_subcommand("split", "Shuffle a corpus and write train/valid/test files");
  s->add_option("input", split.input, "Corpus in form<TAB>pos<TAB>ezafe format")->required();
  s->add_option("-o,--out-dir", split.out_dir, "Directory for train.tsv, valid.tsv, test.tsv")->required();
  s->add_option("--seed", split.seed, "Shuffle seed")->capture_default_str();
  s->add_option("--test", split.test, "Test fraction")->capture_default_str();
  s->add_option("--valid", split.valid, "Validation fraction")->capture_default_str();

  StatsArgs stats;
  auto* st = app.add_subcommand("stats", "Per-POS ezafe rate, frequency and word diversity");
  st->add_option("input", stats.input, "Corpus file")->required();
  st->add_option("-o,--out", stats.out, "Output file (default stdout)");

  SynthArgs synth;
  auto* sy = app.add_subcommand("synth", "Generate a synthetic corpus from an HMM spec");
  sy->add_option("--spec", synth.spec, "HMM spec file");
  sy->add_option("--preset", synth.preset, "Built-in spec")->check(CLI::IsMember(preset_names()));
  sy->add_option("--dump-spec", synth.dump_spec, "Also write the spec used to this file");
  sy->add_option("-n,--sentences", synth.sentences, "Number of sentences")->capture_default_str();
  sy->add_option("--seed", synth.seed, "Generator seed")->capture_default_str();
  sy->add_option("--min-len", synth.min_len, "Minimum sentence length")->capture_default_str();
  sy->add_option("--max-len", synth.max_len, "Maximum sentence length")->capture_default_str();
  sy->add_option("--stop-prob", synth.stop, "Per-token stop probability")->capture_default_str();
  sy->add_option("-o,--out", synth.out, "Output corpus (default stdout)");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a CRF model");
  t->add_option("train", tr.train, "Training corpus")->required();
  t->add_option("--valid", tr.valid, "Validation corpus for checkpoint selection");
  t->add_option("--task", tr.task, "ezafe, pos, pos-ez-input or joint")
      ->check(CLI::IsMember({"ezafe", "pos", "pos-ez-input", "joint"}))
      ->capture_default_str();
  t->add_option("--template", tr.tmpl, "crf1 or crf2")->capture_default_str();
  t->add_option("--l1", tr.config.l1, "L1 coefficient")->capture_default_str();
  t->add_option("--l2", tr.config.l2, "L2 coefficient")->capture_default_str();
  t->add_option("--max-iter", tr.config.max_iterations, "Maximum optimizer iterations")->capture_default_str();
  t->add_option("--eval-every", tr.config.eval_every, "Validation snapshot interval")->capture_default_str();
  t->add_option("--min-count", tr.config.min_count, "Minimum feature frequency")->capture_default_str();
  t->add_option("--threads", tr.config.threads, "Gradient threads; results depend on this count")
      ->capture_default_str();
  t->add_option("--max-len", tr.max_len, "Drop sentences longer than this")->capture_default_str();
  t->add_option("--ezafe-model", tr.ezafe_model, "Ezafe model supplying input flags (pos-ez-input)");
  t->add_flag("--gold-ezafe", tr.gold_ezafe, "Use gold ezafe flags as input (pos-ez-input)");
  t->add_option("-o,--out", tr.out, "Model file")->required();
  t->add_option("--log", tr.log, "Training log (default <out>.log)");

  TagArgs tg;
  auto* g = app.add_subcommand("tag", "Tag text with a trained model");
  g->add_option("model", tg.model, "Model file")->required();
  g->add_option("input", tg.input, "One word per line (extra columns copied), blank line between sentences; - for stdin")
      ->required();
  g->add_option("--ezafe-model", tg.ezafe_model, "Ezafe model for a pos-ez-input model");
  g->add_option("-o,--out", tg.out, "Output corpus (default stdout)");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Score a model on a gold corpus");
  e->add_option("model", ev.model, "Model file")->required();
  e->add_option("corpus", ev.corpus, "Gold corpus")->required();
  e->add_option("--ezafe-model", ev.ezafe_model, "Ezafe model for a pos-ez-input model (default gold flags)");
  e->add_option("--report", ev.report, "Write <prefix>.txt and <prefix>.json");

  ExperimentArgs ex;
  auto* x = app.add_subcommand("experiment", "Run a key=value experiment config end to end");
  x->add_option("config", ex.config, "Config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    std::cerr << "pert: " << err.what() << "\n";
    return kUsage;
  }

  try {
    if (*s) return cmd_split(split);
    if (*st) return cmd_stats(stats);
    if (*sy) return cmd_synth(synth);
    if (*t) return cmd_train(tr);
    if (*g) return cmd_tag(tg);
    if (*e) return cmd_eval(ev);
    if (*x) return cmd_experiment(ex);
  } catch (const UsageError& err) {
    std::cerr << "pert: " << err.what() << "\n";
    return kUsage;
  } catch (const TrainingError& err) {
    std::cerr << "pert: training failed: " << err.what() << "\n";
    return kTraining;
  } catch (const std::exception& err) {
    std::cerr << "pert: " << err.what() << "\n";
    return kData;
  }
  return kUsage;
}
