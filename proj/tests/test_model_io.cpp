#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "pert/crf.hpp"
#include "pert/error.hpp"

using namespace pert;

TEST_CASE("hand-built model file loads with the written weights") {
  const std::string text =
      "PERTCRF v1 CRF2 2 1\n"
      "0\t1\n"
      "F\tw[0]=ketāb\t0.25\t-1.5\n"
      "T\t0\t0.1\t-0.30000000000000004\n"
      "T\t1\t0\t1e-300\n";
  const CrfModel m = load_model(text);
  CHECK(m.labels == std::vector<std::string>{"0", "1"});
  CHECK(m.tmpl.id == TemplateId::Crf2);
  CHECK_FALSE(m.tmpl.ezafe_input);
  CHECK(m.features.name(0) == "w[0]=ketāb");
  CHECK(m.emission == std::vector<double>{0.25, -1.5});
  CHECK(m.transition == std::vector<double>{0.1, -0.30000000000000004, 0.0, 1e-300});
  CHECK(save_model(m) == text);
}

TEST_CASE("save then load is exact") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    auto p = oracle::random_tiny_problem(rng);
    p.model.tmpl = FeatureTemplate{trial % 2 ? TemplateId::Crf2 : TemplateId::Crf1, 5, trial % 3 == 0};
    p.model.emission[0] = std::numeric_limits<double>::denorm_min();
    const CrfModel back = load_model(save_model(p.model));
    CHECK(back == p.model);
    CHECK(save_model(back) == save_model(p.model));
    for (const auto& s : p.batch) {
      const auto a = viterbi(score_lattice(p.model, s.features));
      const auto b = viterbi(score_lattice(back, s.features));
      CHECK(a.labels == b.labels);
      CHECK(a.score == b.score);
    }
  }
}

TEST_CASE("load errors") {
  const std::string good_tail = "A\n";
  CHECK_THROWS_WITH_AS(load_model("PERTCRF v99 CRF1 1 0\nA\nT\tA\t0\n"), doctest::Contains("unsupported version"),
                       DataError);
  CHECK_THROWS_WITH_AS(load_model("PERTCRF v1 CRF9 1 0\nA\nT\tA\t0\n"), doctest::Contains("unknown template id"),
                       DataError);
  CHECK_THROWS_WITH_AS(load_model("PERTCRF v1 CRF1 1 1\nA\nF\tx\t1\n"), doctest::Contains("truncated"), DataError);
  CHECK_THROWS_AS(load_model("hello\n"), DataError);
  CHECK_THROWS_AS(load_model(""), DataError);
  CHECK_THROWS_AS(load_model("PERTCRF v1 CRF1 1 0\nA\nT\tA\tnan\n"), DataError);
  CHECK_THROWS_AS(load_model("PERTCRF v1 CRF1 1 0\nA\nT\tA\tabc\n"), DataError);
  CHECK_THROWS_AS(load_model("PERTCRF v1 CRF1 1 0\nA\nT\tA\t0\t1\n"), DataError);
  CHECK_THROWS_AS(load_model("PERTCRF v1 CRF1 1 0\nA\nT\tA\t0\nextra\n"), DataError);
  CHECK_THROWS_AS(load_model("PERTCRF v1 CRF1 2 0\nA\tA\nT\tA\t0\t0\nT\tA\t0\t0\n"), DataError);
  CHECK_THROWS_AS(load_model_file("/nonexistent/model.crf"), DataError);
}
