#include "pert/report.hpp"

#include <json.hpp>

#include "pert/text.hpp"

namespace pert {

const EvalSection* EvalReport::find(const std::string& name, const std::string& task) const {
  for (const auto& s : sections) {
    if (s.name == name && s.task == task) return &s;
  }
  return nullptr;
}

namespace {

std::string num(double v) { return text::fixed(v, 4); }

std::string signed_num(double v) { return (v >= 0.0 ? "+" : "") + text::fixed(v, 4); }

}  // namespace

std::string EvalReport::to_text() const {
  std::string out;
  if (!header.empty()) {
    out += "[run]\n";
    for (const auto& [k, v] : header) out += k + '\t' + v + '\n';
  }
  for (const auto& s : sections) {
    if (!out.empty()) out += '\n';
    out += "[" + s.name + " " + s.task + "]\n";
    out += std::string("average\t") + (s.binary ? "positive-class" : "macro") + '\n';
    out += "precision\t" + num(s.metrics.precision) + '\n';
    out += "recall\t" + num(s.metrics.recall) + '\n';
    out += "f1\t" + num(s.metrics.f1) + '\n';
    out += "accuracy\t" + num(s.metrics.accuracy) + '\n';
    out += "\nper_tag\ntag\tprecision\trecall\tf1\tsupport\n";
    for (const auto& t : s.per_tag) {
      out += t.tag + '\t' + num(t.metrics.precision) + '\t' + num(t.metrics.recall) + '\t' +
             num(t.metrics.f1) + '\t' + std::to_string(t.support) + '\n';
    }
    if (s.ezafe_per_pos) {
      out += "\nezafe_f1_per_pos\npos\tf1\n";
      for (const auto& [pos, f] : s.ezafe_per_pos->f1) out += pos + '\t' + num(f) + '\n';
      out += "macro_mean\t" + num(s.ezafe_per_pos->unweighted_mean) + " (unweighted)\n";
    }
  }
  if (delta) {
    if (!out.empty()) out += '\n';
    out += "[delta f1]\ntag\tdelta\n";
    for (const auto& [tag, d] : *delta) out += tag + '\t' + signed_num(d) + '\n';
  }
  return out;
}

std::string EvalReport::to_json() const {
  using nlohmann::ordered_json;
  ordered_json doc;
  ordered_json hdr = ordered_json::object();
  for (const auto& [k, v] : header) hdr[k] = v;
  doc["header"] = hdr;
  ordered_json sections_json = ordered_json::array();
  for (const auto& s : sections) {
    ordered_json j;
    j["name"] = s.name;
    j["task"] = s.task;
    j["average"] = s.binary ? "positive-class" : "macro";
    j["precision"] = s.metrics.precision;
    j["recall"] = s.metrics.recall;
    j["f1"] = s.metrics.f1;
    j["accuracy"] = s.metrics.accuracy;
    ordered_json per_tag = ordered_json::object();
    for (const auto& t : s.per_tag) {
      per_tag[t.tag] = {{"precision", t.metrics.precision},
                        {"recall", t.metrics.recall},
                        {"f1", t.metrics.f1},
                        {"support", t.support}};
    }
    j["per_tag"] = per_tag;
    if (s.ezafe_per_pos) {
      ordered_json by_pos = ordered_json::object();
      for (const auto& [pos, f] : s.ezafe_per_pos->f1) by_pos[pos] = f;
      j["ezafe_f1_per_pos"] = by_pos;
      j["macro_mean"] = s.ezafe_per_pos->unweighted_mean;
    }
    sections_json.push_back(std::move(j));
  }
  doc["sections"] = sections_json;
  if (delta) {
    ordered_json d = ordered_json::object();
    for (const auto& [tag, v] : *delta) d[tag] = v;
    doc["delta_f1"] = d;
  }
  return doc.dump(2) + "\n";
}

}  // namespace pert
