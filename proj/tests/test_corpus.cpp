#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "pert/corpus.hpp"
#include "pert/error.hpp"
#include "pert/random.hpp"
#include "pert/text.hpp"
#include "pert/utf8.hpp"

using namespace pert;

namespace {

Corpus random_corpus(std::mt19937_64& rng, std::size_t n) {
  static const std::vector<std::string> forms{"ketāb", "pesar", "xošhāl", "آمد", "کتاب", ".", "a", "zz", "خوب"};
  static const std::vector<std::string> tags{"N", "ADJ", "V", "DELM", "P"};
  std::vector<Sentence> out;
  for (std::size_t i = 0; i < n; ++i) {
    Sentence s;
    const std::size_t len = 1 + uniform_below(rng, 8);
    for (std::size_t t = 0; t < len; ++t) {
      s.tokens.push_back(Token{forms[uniform_below(rng, forms.size())], tags[uniform_below(rng, tags.size())],
                               static_cast<std::uint8_t>(uniform_below(rng, 2))});
    }
    out.push_back(std::move(s));
  }
  return Corpus::from_sentences(std::move(out));
}

}  // namespace

TEST_CASE("parse two sentences") {
  const auto c = parse_corpus("a\tN\t1\nb\tADJ\t0\nc\tV\t0\n\nd\tN\t0\ne\tDELM\t0\n");
  CHECK(c.size() == 2);
  CHECK(c.token_count() == 5);
  CHECK(c.tag_inventory() == std::vector<std::string>{"N", "ADJ", "V", "DELM"});
  CHECK(c.sentences()[0].tokens[0] == Token{"a", "N", 1});
}

TEST_CASE("tag inventory is first-occurrence order") {
  const auto c = parse_corpus("pesar\tN\t1\nxošhāl\tADJ\t0\n'āmad\tV\t0\n.\tDELM\t0\n");
  CHECK(c.tag_inventory() == std::vector<std::string>{"N", "ADJ", "V", "DELM"});
}

TEST_CASE("parse errors name the line") {
  CHECK_THROWS_WITH_AS(parse_corpus("a\tN\t0\nketāb\tN\t2\n"), doctest::Contains("line 2"), ParseError);
  CHECK_THROWS_WITH_AS(parse_corpus("a\tN\t0\n\n\nb\tN\t0\n"), doctest::Contains("line 3"), ParseError);
  CHECK_THROWS_WITH_AS(parse_corpus("a\tN\n"), doctest::Contains("line 1"), ParseError);
  CHECK_THROWS_AS(parse_corpus("a\tN\t0\textra\n"), ParseError);
  CHECK_THROWS_AS(parse_corpus("a b\tN\t0\n"), ParseError);
  CHECK_THROWS_AS(parse_corpus("\tN\t0\n"), ParseError);
  CHECK_THROWS_AS(parse_corpus("\na\tN\t0\n"), ParseError);
  CHECK_THROWS_AS(parse_corpus("\xff\tN\t0\n"), ParseError);
  try {
    parse_corpus("a\tN\t0\nb\tN\tx\n");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("write format") {
  CHECK(write_corpus(Corpus{}) == "");
  const auto one = parse_corpus("a\tN\t0\nb\tV\t1\n");
  CHECK(write_corpus(one) == "a\tN\t0\nb\tV\t1\n");
  const auto two = parse_corpus("a\tN\t0\n\nb\tV\t1\n");
  CHECK(write_corpus(two) == "a\tN\t0\n\nb\tV\t1\n");
}

TEST_CASE("round trip over random corpora") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const Corpus c = random_corpus(rng, uniform_below(rng, 12));
    const std::string text = write_corpus(c);
    const Corpus back = parse_corpus(text);
    CHECK(back == c);
    CHECK(write_corpus(back) == text);
  }
}

TEST_CASE("shuffle_split sizes, partition and determinism") {
  std::mt19937_64 rng(2);
  const Corpus ten = random_corpus(rng, 10);
  const auto s = shuffle_split(ten, SplitSpec{});
  CHECK(s.train.size() == 8);
  CHECK(s.valid.size() == 1);
  CHECK(s.test.size() == 1);

  const auto again = shuffle_split(ten, SplitSpec{});
  CHECK(again.train == s.train);
  CHECK(again.valid == s.valid);
  CHECK(again.test == s.test);

  const Corpus big = random_corpus(rng, 257);
  const auto p = shuffle_split(big, SplitSpec{17, 0.1, 0.1});
  std::vector<std::string> before, after;
  for (const auto& x : big.sentences()) before.push_back(write_corpus(Corpus::from_sentences({x})));
  for (const auto* part : {&p.train, &p.valid, &p.test}) {
    for (const auto& x : part->sentences()) after.push_back(write_corpus(Corpus::from_sentences({x})));
  }
  std::sort(before.begin(), before.end());
  std::sort(after.begin(), after.end());
  CHECK(before == after);
  CHECK(p.test.size() == 25);
  CHECK(p.valid.size() == 25);

  // Order is test, then valid, then train, in the shuffled order.
  const auto order = shuffle_order(big.size(), 17);
  CHECK(p.test.sentences()[0] == big.sentences()[order[0]]);
  CHECK(p.valid.sentences()[0] == big.sentences()[order[25]]);
  CHECK(p.train.sentences()[0] == big.sentences()[order[50]]);
}

TEST_CASE("shuffle_order is a permutation and seed dependent") {
  auto a = shuffle_order(1000, 17);
  auto b = shuffle_order(1000, 18);
  CHECK(a != b);
  std::sort(a.begin(), a.end());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == i);
  // Pinned so that splits stay comparable across releases.
  CHECK(shuffle_order(10, 17) == std::vector<std::size_t>{5, 0, 4, 8, 6, 2, 7, 1, 3, 9});
}

TEST_CASE("split sizes at full corpus scale use floor") {
  std::vector<Sentence> many(335925, Sentence{{Token{"w", "N", 0}}});
  const auto p = shuffle_split(Corpus::from_sentences(std::move(many)), SplitSpec{});
  CHECK(p.test.size() == 33592);
  CHECK(p.valid.size() == 33592);
  CHECK(p.train.size() == 268741);
}

TEST_CASE("split validation") {
  std::mt19937_64 rng(3);
  const Corpus ten = random_corpus(rng, 10);
  CHECK_THROWS_AS(shuffle_split(ten, SplitSpec{17, 0.6, 0.5}), UsageError);
  CHECK_THROWS_AS(shuffle_split(ten, SplitSpec{17, 0.0, 0.1}), UsageError);
  CHECK_THROWS_AS(shuffle_split(ten, SplitSpec{17, 0.05, 0.1}), DataError);
  CHECK_THROWS_AS(shuffle_split(random_corpus(rng, 2), SplitSpec{}), DataError);
}

TEST_CASE("filter_long is strict above max_len") {
  auto sentence = [](std::size_t n) {
    Sentence s;
    for (std::size_t i = 0; i < n; ++i) s.tokens.push_back(Token{"w", "N", 0});
    return s;
  };
  const Corpus c = Corpus::from_sentences({sentence(3), sentence(513), sentence(512)});
  const Corpus f = filter_long(c, 512);
  REQUIRE(f.size() == 2);
  CHECK(f.sentences()[0].size() == 3);
  CHECK(f.sentences()[1].size() == 512);
  CHECK(filter_long(c, 1000) == c);
  CHECK_THROWS_AS(filter_long(c, 0), UsageError);
}

TEST_CASE("shannon index") {
  CHECK(shannon_index({{"x", 7}}) == 0.0);
  std::map<std::string, std::uint64_t> eight;
  for (char c = 'a'; c < 'i'; ++c) eight[std::string(1, c)] = 5;
  CHECK(std::abs(shannon_index(eight) - std::log(8.0)) <= 1e-9);
  const double h = shannon_index({{"a", 1}, {"b", 1}, {"c", 2}});
  CHECK(std::abs(h - 1.0397207708399179) <= 1e-9);
  CHECK_THROWS(shannon_index({}));
  CHECK_THROWS(shannon_index({{"a", 0}}));
}

TEST_CASE("shannon index bounds") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    std::map<std::string, std::uint64_t> counts;
    const std::size_t k = 1 + uniform_below(rng, 10);
    for (std::size_t i = 0; i < k; ++i) counts["w" + std::to_string(i)] = 1 + uniform_below(rng, 20);
    const double h = shannon_index(counts);
    CHECK(h >= 0.0);
    CHECK(h <= std::log(static_cast<double>(k)) + 1e-12);
  }
}

TEST_CASE("corpus stats") {
  const auto c = parse_corpus("pesar\tN\t1\nketāb\tN\t0\nxub\tADJ\t0\nraft\tV\t0\n");
  const auto rows = corpus_stats(c);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].pos == "N");
  CHECK(rows[0].ezafe_pct == 50.0);
  CHECK(rows[0].freq_pct == 50.0);
  CHECK(rows[0].diversity == doctest::Approx(std::log(2.0)));
  CHECK(rows[1].pos == "ADJ");  // ties on 0% ordered by tag
  CHECK(rows[2].pos == "V");
  CHECK(format_stats(rows) ==
        "pos\tezafe_pct\tfreq_pct\tH\n"
        "N\t50.00\t50.00\t0.693\n"
        "ADJ\t0.00\t25.00\t0.000\n"
        "V\t0.00\t25.00\t0.000\n");

  const auto all_n = parse_corpus("a\tN\t1\nb\tN\t1\n\nc\tV\t0\n");
  CHECK(corpus_stats(all_n)[0].ezafe_pct == 100.0);
}

TEST_CASE("corpus stats frequency column sums to 100") {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const auto rows = corpus_stats(random_corpus(rng, 1 + uniform_below(rng, 30)));
    double total = 0;
    for (const auto& r : rows) {
      total += r.freq_pct;
      CHECK(r.ezafe_pct >= 0.0);
      CHECK(r.ezafe_pct <= 100.0);
      CHECK(r.diversity >= 0.0);
    }
    CHECK(std::abs(total - 100.0) <= 0.01);
  }
}

TEST_CASE("utf8 helpers") {
  CHECK(utf8::valid("ketāb"));
  CHECK(utf8::valid("کتاب"));
  CHECK_FALSE(utf8::valid("\xc0\xaf"));
  CHECK_FALSE(utf8::valid("\xed\xa0\x80"));
  CHECK_FALSE(utf8::valid("\xe2\x82"));
  CHECK(utf8::length("کتاب") == 4);
  CHECK(utf8::prefix("کتاب", 2) == "کت");
  CHECK(utf8::suffix("ketāb", 3) == "tāb");
}

TEST_CASE("text helpers") {
  CHECK(text::fixed(0.66666, 4) == "0.6667");
  CHECK(text::shortest(0.1) == "0.1");
  CHECK(text::parse_double(text::shortest(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK_FALSE(text::parse_double("1.0x"));
  CHECK_FALSE(text::parse_unsigned("-1"));
  CHECK(text::split("a\tb\t", '\t').size() == 3);
  CHECK(text::trim("  x \t") == "x");
}
