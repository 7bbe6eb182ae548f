#include <doctest.h>

#include <json.hpp>

#include <algorithm>
#include <random>
#include <sstream>

#include "pert/error.hpp"
#include "pert/metrics.hpp"
#include "pert/random.hpp"
#include "pert/report.hpp"
#include "pert/text.hpp"

using namespace pert;

namespace {

TagSequences bits(std::initializer_list<const char*> v) {
  std::vector<std::string> s;
  for (auto x : v) s.emplace_back(x);
  return {s};
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-12; }

}  // namespace

TEST_CASE("confusion counts") {
  const auto same = confusion({{"N", "V"}, {"N"}}, {{"N", "V"}, {"N"}}, {"N", "V"});
  CHECK(same.at(0, 0) == 2);
  CHECK(same.at(1, 1) == 1);
  CHECK(same.trace() == same.total());

  const auto one = confusion({{"N"}}, {{"ADJ"}}, {"N", "ADJ"});
  CHECK(one.at(0, 1) == 1);

  CHECK_THROWS_WITH_AS(confusion({{"N"}, {"N", "N"}}, {{"N"}, {"N"}}, {"N"}), doctest::Contains("sentence 1"),
                       DataError);
  CHECK_THROWS_AS(confusion({{"N"}}, {{"X"}}, {"N"}), DataError);
  CHECK_THROWS_AS(confusion({{"N"}}, {}, {"N"}), DataError);
}

TEST_CASE("binary metrics hand example") {
  const auto t = confusion(bits({"1", "0", "1", "1"}), bits({"1", "1", "1", "0"}), {"0", "1"});
  const auto m = binary_metrics(t, "1");
  CHECK(close(m.precision, 2.0 / 3.0));
  CHECK(close(m.recall, 2.0 / 3.0));
  CHECK(close(m.f1, 2.0 / 3.0));
  CHECK(close(m.accuracy, 0.5));

  const auto perfect = binary_metrics(confusion(bits({"1", "0"}), bits({"1", "0"}), {"0", "1"}), "1");
  CHECK(perfect.precision == 1.0);
  CHECK(perfect.recall == 1.0);
  CHECK(perfect.f1 == 1.0);
  CHECK(perfect.accuracy == 1.0);

  const auto none = binary_metrics(confusion(bits({"0", "0"}), bits({"0", "0"}), {"0", "1"}), "1");
  CHECK(none.precision == 0.0);
  CHECK(none.recall == 0.0);
  CHECK(none.f1 == 0.0);
}

TEST_CASE("macro metrics hand example with a fully confused tag") {
  const auto t = confusion(bits({"A", "A", "B", "B", "C", "C"}), bits({"A", "A", "B", "B", "A", "B"}), {"A", "B", "C", "D"});
  const auto m = macro_metrics(t);
  CHECK(close(m.precision, 4.0 / 9.0));
  CHECK(close(m.recall, 2.0 / 3.0));
  CHECK(close(m.f1, 1.6 / 3.0));
  CHECK(close(m.accuracy, 4.0 / 6.0));
  const auto per = per_tag_scores(t);
  REQUIRE(per.size() == 3);  // D never occurs
  CHECK(close(per[0].metrics.f1, 0.8));
  CHECK(per[2].metrics.f1 == 0.0);
  CHECK(per[2].support == 2);

  const auto balanced = macro_metrics(confusion(bits({"X", "Y"}), bits({"X", "Y"}), {"X", "Y"}));
  CHECK(balanced.f1 == 1.0);
}

TEST_CASE("binary and macro measures are consistent on two tags") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    TagSequences gold(1), pred(1);
    const std::size_t n = 1 + uniform_below(rng, 40);
    for (std::size_t i = 0; i < n; ++i) {
      gold[0].push_back(uniform_below(rng, 2) ? "1" : "0");
      pred[0].push_back(uniform_below(rng, 2) ? "1" : "0");
    }
    const auto t = confusion(gold, pred, {"0", "1"});
    const auto bin = binary_metrics(t, "1");
    const auto per = per_tag_scores(t);
    for (const auto& s : per) {
      if (s.tag == "1") CHECK(s.metrics.f1 == bin.f1);
    }
    if (per.size() == 2) CHECK(close(macro_metrics(t).f1, (per[0].metrics.f1 + per[1].metrics.f1) / 2));
    CHECK(bin.accuracy == static_cast<double>(t.trace()) / static_cast<double>(t.total()));
    for (double v : {bin.precision, bin.recall, bin.f1, bin.accuracy}) CHECK((v >= 0.0 && v <= 1.0));

    // Sentence order does not matter.
    TagSequences g2, p2;
    for (std::size_t i = 0; i < n; ++i) {
      g2.push_back({gold[0][n - 1 - i]});
      p2.push_back({pred[0][n - 1 - i]});
    }
    const auto b2 = binary_metrics(confusion(g2, p2, {"0", "1"}), "1");
    CHECK(b2.f1 == bin.f1);
    CHECK(b2.accuracy == bin.accuracy);
  }
}

TEST_CASE("ezafe F1 per POS") {
  const FlagSequences gold{{1, 1, 0, 1, 0, 0}};
  const FlagSequences pred{{1, 0, 1, 1, 1, 0}};
  const TagSequences pos{{"N", "N", "N", "ADJ", "ADJ", "V"}};
  const auto b = ezafe_f1_per_pos(gold, pred, pos);
  REQUIRE(b.f1.size() == 2);
  CHECK(b.f1[0].first == "ADJ");
  CHECK(close(b.f1[0].second, 2.0 / 3.0));
  CHECK(b.f1[1].first == "N");
  CHECK(close(b.f1[1].second, 0.5));
  CHECK(close(b.unweighted_mean, (2.0 / 3.0 + 0.5) / 2.0));

  const auto perfect = ezafe_f1_per_pos(gold, gold, pos);
  for (const auto& [tag, f] : perfect.f1) CHECK(f == 1.0);

  const auto missed = ezafe_f1_per_pos({{1, 0}}, {{0, 0}}, {{"N", "V"}});
  REQUIRE(missed.f1.size() == 1);
  CHECK(missed.f1[0].second == 0.0);
  CHECK_THROWS_AS(ezafe_f1_per_pos({{1}}, {{1, 0}}, {{"N"}}), DataError);
}

TEST_CASE("delta report") {
  const ScoreMap before{{"N", 0.9}, {"ADJ", 0.8}, {"IDEN", 0.7}};
  const ScoreMap after{{"N", 0.91}, {"ADJ", 0.79}, {"IDEN", 0.728}};
  const auto d = delta_report(before, after);
  REQUIRE(d.size() == 3);
  CHECK(d[0].first == "IDEN");
  CHECK(d[0].second == 0.728 - 0.7);
  CHECK(d[2].first == "ADJ");
  for (const auto& [tag, v] : delta_report(before, before)) CHECK(v == 0.0);
  CHECK_THROWS_AS(delta_report(before, {{"N", 1.0}}), DataError);
}

TEST_CASE("text and json reports carry the same numbers") {
  EvalReport r;
  r.header = {{"task", "ezafe"}, {"template", "CRF1"}};
  const auto t = confusion(bits({"1", "0", "1", "1", "0"}), bits({"1", "1", "1", "0", "0"}), {"0", "1"});
  EvalSection s;
  s.name = "test";
  s.task = "ezafe";
  s.binary = true;
  s.metrics = binary_metrics(t, "1");
  s.per_tag = per_tag_scores(t);
  s.ezafe_per_pos = ezafe_f1_per_pos({{1, 0, 1, 1, 0}}, {{1, 1, 1, 0, 0}}, {{"N", "N", "ADJ", "ADJ", "V"}});
  r.sections.push_back(s);
  r.delta = ScoreMap{{"N", 0.028}, {"V", -0.01}};

  const std::string text = r.to_text();
  const auto j = nlohmann::json::parse(r.to_json());
  const auto& js = j["sections"][0];
  for (const char* key : {"precision", "recall", "f1", "accuracy"}) {
    const std::string line = std::string(key) + "\t" + text::fixed(js[key].get<double>(), 4) + "\n";
    CHECK(text.find(line) != std::string::npos);
  }
  CHECK(js["per_tag"]["1"]["support"] == 3);
  CHECK(js.contains("ezafe_f1_per_pos"));
  CHECK(js.contains("macro_mean"));
  CHECK(text.find("ezafe_f1_per_pos") != std::string::npos);
  CHECK(text.find("macro_mean\t" + text::fixed(js["macro_mean"].get<double>(), 4)) != std::string::npos);
  CHECK(text.find("N\t+0.0280") != std::string::npos);
  CHECK(text.find("V\t-0.0100") != std::string::npos);
  CHECK(j["delta_f1"]["N"] == 0.028);
  CHECK(r.find("test", "ezafe") != nullptr);
  CHECK(r.find("test", "pos") == nullptr);
}
