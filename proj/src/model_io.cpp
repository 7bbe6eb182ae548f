#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>

#include "pert/crf.hpp"
#include "pert/error.hpp"
#include "pert/text.hpp"

// Text model format:
//   PERTCRF v1 <template-id> <L> <F>
//   <label_0> \t ... \t <label_L-1>
//   F \t <feature> \t <w_0> ... <w_L-1>      (F lines)
//   T \t <from-label> \t <w_0> ... <w_L-1>   (L lines)
// Weights use the shortest decimal that reads back to the same double.

namespace pert {

void save_model(const CrfModel& model, std::ostream& out) {
  const std::size_t L = model.num_labels();
  const std::size_t F = model.num_features();
  out << "PERTCRF v" << kModelFormatVersion << ' ' << template_name(model.tmpl) << ' ' << L << ' '
      << F << '\n';
  for (std::size_t y = 0; y < L; ++y) out << (y ? "\t" : "") << model.labels[y];
  out << '\n';
  for (std::size_t f = 0; f < F; ++f) {
    out << "F\t" << model.features.name(static_cast<std::uint32_t>(f));
    for (std::size_t y = 0; y < L; ++y) out << '\t' << text::shortest(model.emission[f * L + y]);
    out << '\n';
  }
  for (std::size_t a = 0; a < L; ++a) {
    out << "T\t" << model.labels[a];
    for (std::size_t b = 0; b < L; ++b) out << '\t' << text::shortest(model.transition[a * L + b]);
    out << '\n';
  }
}

std::string save_model(const CrfModel& model) {
  std::ostringstream out;
  save_model(model, out);
  return out.str();
}

namespace {

class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  std::string_view next() {
    if (pos_ >= text_.size()) throw DataError("truncated model file after line " + std::to_string(line_));
    std::size_t end = text_.find('\n', pos_);
    if (end == std::string_view::npos) end = text_.size();
    const auto line = text_.substr(pos_, end - pos_);
    pos_ = end + 1;
    ++line_;
    return line;
  }

  std::size_t line() const { return line_; }
  bool at_end() const { return pos_ >= text_.size(); }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
};

std::size_t parse_count(std::string_view s, std::size_t line, const char* what) {
  const auto v = text::parse_unsigned(s);
  if (!v) throw ParseError(line, std::string("bad ") + what + " '" + std::string(s) + "'");
  return static_cast<std::size_t>(*v);
}

void parse_weights(std::span<const std::string_view> fields, std::size_t line, double* out) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const auto v = text::parse_double(fields[i]);
    if (!v) throw ParseError(line, "bad weight '" + std::string(fields[i]) + "'");
    out[i] = *v;
  }
}

}  // namespace

CrfModel load_model(std::string_view text) {
  LineReader in(text);
  const auto header = text::split(in.next(), ' ');
  if (header.empty() || header[0] != "PERTCRF") throw DataError("not a PERTCRF model file");
  if (header.size() != 5) throw ParseError(1, "malformed model header");
  if (header[1].size() < 2 || header[1][0] != 'v') throw ParseError(1, "malformed version field");
  const auto version = text::parse_unsigned(header[1].substr(1));
  if (!version || *version != static_cast<unsigned long long>(kModelFormatVersion)) {
    throw DataError("unsupported version " + std::string(header[1].substr(1)));
  }
  const auto tmpl = parse_template_name(header[2]);
  if (!tmpl) throw DataError("unknown template id '" + std::string(header[2]) + "'");
  const std::size_t L = parse_count(header[3], 1, "label count");
  const std::size_t F = parse_count(header[4], 1, "feature count");
  if (L == 0) throw ParseError(1, "model must have at least one label");

  std::vector<std::string> labels;
  for (auto l : text::split(in.next(), '\t')) labels.emplace_back(l);
  if (labels.size() != L) throw ParseError(2, "expected " + std::to_string(L) + " labels");

  std::vector<std::string> names;
  names.reserve(F);
  std::vector<double> emission(F * L);
  for (std::size_t f = 0; f < F; ++f) {
    const auto fields = text::split(in.next(), '\t');
    if (fields.size() != L + 2 || fields[0] != "F") {
      throw ParseError(in.line(), "malformed feature line");
    }
    names.emplace_back(fields[1]);
    parse_weights(std::span(fields).subspan(2), in.line(), &emission[f * L]);
  }
  std::vector<double> transition(L * L);
  for (std::size_t a = 0; a < L; ++a) {
    const auto fields = text::split(in.next(), '\t');
    if (fields.size() != L + 2 || fields[0] != "T") {
      throw ParseError(in.line(), "malformed transition line");
    }
    if (fields[1] != labels[a]) throw ParseError(in.line(), "transition rows out of label order");
    parse_weights(std::span(fields).subspan(2), in.line(), &transition[a * L]);
  }
  if (!in.at_end()) throw ParseError(in.line() + 1, "trailing content after model");

  CrfModel model(std::move(labels), FeatureIndex(std::move(names)), *tmpl);
  model.emission = std::move(emission);
  model.transition = std::move(transition);
  model.validate();
  return model;
}

CrfModel load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file '" + path + "'");
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return load_model(text);
}

}  // namespace pert
