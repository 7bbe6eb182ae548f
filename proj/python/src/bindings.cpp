#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "pert/corpus.hpp"
#include "pert/crf.hpp"
#include "pert/datagen.hpp"
#include "pert/error.hpp"
#include "pert/features.hpp"
#include "pert/io.hpp"
#include "pert/tasks.hpp"

namespace py = pybind11;
using namespace pert;

namespace {

using PyToken = std::tuple<std::string, std::string, int>;
using PySentence = std::vector<PyToken>;
using Words = std::vector<std::vector<std::string>>;

Corpus corpus_from_py(const std::vector<PySentence>& sentences) {
  std::vector<Sentence> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) {
    Sentence sent;
    for (const auto& [form, pos, ez] : s) {
      if (ez != 0 && ez != 1) throw DataError("ezafe flag must be 0 or 1");
      sent.tokens.push_back(Token{form, pos, static_cast<std::uint8_t>(ez)});
    }
    out.push_back(std::move(sent));
  }
  return Corpus::from_sentences(std::move(out));
}

std::vector<PySentence> corpus_to_py(const Corpus& c) {
  std::vector<PySentence> out;
  out.reserve(c.size());
  for (const auto& s : c.sentences()) {
    PySentence sent;
    for (const auto& t : s.tokens) sent.emplace_back(t.form, t.pos, t.ezafe);
    out.push_back(std::move(sent));
  }
  return out;
}

FeatureTemplate template_from(const std::string& name) {
  const auto t = parse_template_name(name);
  if (!t || t->ezafe_input) throw UsageError("template must be CRF1 or CRF2, got '" + name + "'");
  return *t;
}

EzafeMode mode_from(const std::string& name) {
  if (name == "none") return EzafeMode::None;
  if (name == "gold") return EzafeMode::Gold;
  if (name == "predicted") return EzafeMode::Predicted;
  throw UsageError("ezafe mode must be none, gold or predicted, got '" + name + "'");
}

TrainConfig config_from(double l1, double l2, std::size_t max_iter, std::size_t eval_every, unsigned threads) {
  TrainConfig c;
  c.l1 = l1;
  c.l2 = l2;
  c.max_iterations = max_iter;
  c.eval_every = eval_every;
  c.threads = threads;
  c.validate();
  return c;
}

py::dict run_to_py(RunResult r) {
  py::dict d;
  d["model"] = std::move(r.training.model);
  d["report_text"] = r.report.to_text();
  d["report_json"] = r.report.to_json();
  d["selected_iteration"] = r.training.selected_iteration;
  d["selected_validation"] = r.training.selected_validation;
  return d;
}

}  // namespace

PYBIND11_MODULE(_pertcrf, m) {
  m.doc() = "CRF taggers for Persian ezafe recognition and POS tagging";

  static py::exception<DataError> data_error(m, "DataError", PyExc_ValueError);
  static py::exception<UsageError> usage_error(m, "UsageError", PyExc_ValueError);
  static py::exception<TrainingError> training_error(m, "TrainingError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const DataError& e) {
      PyErr_SetString(data_error.ptr(), e.what());
    } catch (const UsageError& e) {
      PyErr_SetString(usage_error.ptr(), e.what());
    } catch (const TrainingError& e) {
      PyErr_SetString(training_error.ptr(), e.what());
    }
  });

  py::class_<Corpus>(m, "Corpus")
      .def(py::init(&corpus_from_py), py::arg("sentences"),
           "Build from a list of sentences of (form, pos, ezafe) tuples.")
      .def_static("parse", [](const std::string& text) { return parse_corpus(std::string_view(text)); })
      .def_static("read", &read_corpus_file, py::arg("path"))
      .def("to_text", [](const Corpus& c) { return write_corpus(c); })
      .def("write", [](const Corpus& c, const std::string& path) { write_file_atomic(path, write_corpus(c)); })
      .def("sentences", &corpus_to_py)
      .def("words", [](const Corpus& c) {
        Words out;
        for (const auto& s : c.sentences()) out.push_back(s.forms());
        return out;
      })
      .def_property_readonly("tags", &Corpus::tag_inventory)
      .def_property_readonly("token_count", &Corpus::token_count)
      .def("__len__", &Corpus::size)
      .def("__eq__", [](const Corpus& a, const Corpus& b) { return a == b; });

  py::class_<CrfModel>(m, "Model")
      .def_static("load", &load_model_file, py::arg("path"))
      .def_static("loads", [](const std::string& text) { return load_model(std::string_view(text)); })
      .def("dumps", [](const CrfModel& mdl) { return save_model(mdl); })
      .def("save", [](const CrfModel& mdl, const std::string& path) { write_file_atomic(path, save_model(mdl)); })
      .def_property_readonly("labels", [](const CrfModel& mdl) { return mdl.labels; })
      .def_property_readonly("template", [](const CrfModel& mdl) { return template_name(mdl.tmpl); })
      .def_property_readonly("task", [](const CrfModel& mdl) { return task_name(infer_task(mdl)); })
      .def_property_readonly("num_features", &CrfModel::num_features)
      .def_property_readonly("num_weights", &CrfModel::num_weights)
      .def(
          "predict",
          [](const CrfModel& mdl, const Words& sentences, std::optional<std::vector<std::vector<int>>> ezafe) {
            if (!ezafe) return predict_tags(mdl, sentences);
            FlagSequences flags;
            for (const auto& row : *ezafe) flags.emplace_back(row.begin(), row.end());
            return predict_tags(mdl, sentences, &flags);
          },
          py::arg("sentences"), py::arg("ezafe") = py::none(),
          "Label sequences for tokenized sentences. Models trained with ezafe input need `ezafe`.")
      .def("evaluate",
           [](const CrfModel& mdl, const Corpus& corpus, const CrfModel* ezafe_model) {
             EvalReport r;
             r.sections = evaluate_model(mdl, corpus, "test", ezafe_model);
             return py::make_tuple(r.to_text(), r.to_json());
           },
           py::arg("corpus"), py::arg("ezafe_model") = nullptr, "Returns (text report, JSON report).")
      .def("__eq__", [](const CrfModel& a, const CrfModel& b) { return a == b; });

  m.def(
      "train",
      [](const std::string& task, const Corpus& train_c, const std::optional<Corpus>& valid,
         const std::optional<Corpus>& test, const std::string& tmpl, const std::string& ezafe_mode,
         const CrfModel* ezafe_model, double l1, double l2, std::size_t max_iter, std::size_t eval_every,
         unsigned threads) {
        const auto t = parse_task(task);
        if (!t) throw UsageError("unknown task '" + task + "'");
        ExperimentData d{train_c, valid.value_or(Corpus{}), test.value_or(Corpus{})};
        const TrainConfig cfg = config_from(l1, l2, max_iter, eval_every, threads);
        const FeatureTemplate ft = template_from(tmpl);
        py::gil_scoped_release release;
        RunResult r;
        switch (*t) {
          case Task::Ezafe: r = run_ezafe(d, ft, cfg); break;
          case Task::Pos: r = run_pos(d, ft, cfg, EzafeMode::None); break;
          case Task::PosEzInput: {
            const EzafeMode mode = mode_from(ezafe_mode);
            if (mode == EzafeMode::None) throw UsageError("pos-ez-input needs ezafe_mode gold or predicted");
            r = run_pos(d, ft, cfg, mode, ezafe_model);
            break;
          }
          case Task::Joint: r = run_joint(d, ft, cfg); break;
        }
        py::gil_scoped_acquire acquire;
        return run_to_py(std::move(r));
      },
      py::arg("task"), py::arg("train"), py::arg("valid") = py::none(), py::arg("test") = py::none(),
      py::arg("template") = "CRF2", py::arg("ezafe_mode") = "gold", py::arg("ezafe_model") = nullptr,
      py::arg("l1") = 0.1, py::arg("l2") = 0.1, py::arg("max_iter") = 100, py::arg("eval_every") = 10,
      py::arg("threads") = 1,
      "Train a tagger. Returns a dict with model, report_text, report_json and the selected iteration.");

  m.def(
      "pipeline_tag",
      [](const Words& sentences, const CrfModel& ezafe_model, const CrfModel& pos_model) {
        return pipeline_tag(sentences, ezafe_model, pos_model);
      },
      py::arg("sentences"), py::arg("ezafe_model"), py::arg("pos_model"));

  m.def(
      "split",
      [](const Corpus& c, std::uint64_t seed, double test, double valid) {
        auto s = shuffle_split(c, SplitSpec{seed, test, valid});
        return py::make_tuple(std::move(s.train), std::move(s.valid), std::move(s.test));
      },
      py::arg("corpus"), py::arg("seed") = 17, py::arg("test") = 0.1, py::arg("valid") = 0.1,
      "Returns (train, valid, test).");
  m.def("filter_long", &filter_long, py::arg("corpus"), py::arg("max_len") = 512);
  m.def("stats", [](const Corpus& c) { return format_stats(corpus_stats(c)); });
  m.def("shannon_index", &shannon_index, py::arg("counts"));

  m.def("presets", &preset_names);
  m.def(
      "synthesize",
      [](const std::string& preset, std::size_t n, std::uint64_t seed, std::size_t min_len, std::size_t max_len,
         double stop_prob) {
        const LengthModel lengths{min_len, max_len, stop_prob};
        lengths.validate();
        return generate(preset_spec(preset), n, lengths, seed);
      },
      py::arg("preset") = "basic", py::arg("sentences") = 1000, py::arg("seed") = 17, py::arg("min_len") = 3,
      py::arg("max_len") = 40, py::arg("stop_prob") = 0.1);
  m.def(
      "bayes_decode",
      [](const std::string& preset, const std::vector<std::string>& words) {
        return bayes_decode(preset_spec(preset), words);
      },
      py::arg("preset"), py::arg("words"), "Posterior-mode tags under a preset's generating process.");
}
