#include "pert/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "pert/error.hpp"
#include "pert/random.hpp"
#include "pert/text.hpp"
#include "pert/utf8.hpp"

namespace pert {

std::vector<std::string> Sentence::forms() const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.form);
  return out;
}

std::vector<std::string> Sentence::tags() const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.pos);
  return out;
}

std::vector<std::uint8_t> Sentence::ezafe_flags() const {
  std::vector<std::uint8_t> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.ezafe);
  return out;
}

Corpus Corpus::from_sentences(std::vector<Sentence> sentences) {
  Corpus c;
  std::unordered_set<std::string> seen;
  for (const auto& s : sentences) {
    if (s.tokens.empty()) throw DataError("corpus contains an empty sentence");
    for (const auto& t : s.tokens) {
      if (seen.insert(t.pos).second) c.tags_.push_back(t.pos);
    }
  }
  c.sentences_ = std::move(sentences);
  return c;
}

std::size_t Corpus::token_count() const noexcept {
  std::size_t n = 0;
  for (const auto& s : sentences_) n += s.size();
  return n;
}

namespace {

bool has_blank(std::string_view s) {
  return s.find_first_of(" \t\r\n\v\f") != std::string_view::npos;
}

}  // namespace

Corpus parse_corpus(std::string_view text) {
  std::vector<Sentence> sentences;
  Sentence current;
  std::size_t line_no = 0;
  bool previous_blank = true;  // a leading blank line is an empty sentence

  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;

    if (line.empty()) {
      if (previous_blank) throw ParseError(line_no, "empty sentence");
      sentences.push_back(std::move(current));
      current = Sentence{};
      previous_blank = true;
      continue;
    }
    previous_blank = false;

    if (!utf8::valid(line)) throw ParseError(line_no, "invalid UTF-8");
    const auto fields = text::split(line, '\t');
    if (fields.size() != 3) {
      throw ParseError(line_no, "expected 3 tab-separated columns, found " +
                                    std::to_string(fields.size()));
    }
    if (fields[0].empty() || has_blank(fields[0])) {
      throw ParseError(line_no, "word form must be non-empty without blanks");
    }
    if (fields[1].empty() || has_blank(fields[1])) {
      throw ParseError(line_no, "POS tag must be non-empty without blanks");
    }
    if (fields[2] != "0" && fields[2] != "1") {
      throw ParseError(line_no, "ezafe flag must be 0 or 1, got '" +
                                    std::string(fields[2]) + "'");
    }
    current.tokens.push_back(Token{std::string(fields[0]), std::string(fields[1]),
                                   static_cast<std::uint8_t>(fields[2] == "1")});
  }
  if (!current.tokens.empty()) sentences.push_back(std::move(current));
  return Corpus::from_sentences(std::move(sentences));
}

Corpus parse_corpus(std::istream& in) {
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse_corpus(std::string_view(text));
}

Corpus read_corpus_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus file '" + path + "'");
  try {
    return parse_corpus(in);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.detail() + " (in " + path + ")");
  }
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
  bool first = true;
  for (const auto& s : corpus.sentences()) {
    if (!first) out << '\n';
    first = false;
    for (const auto& t : s.tokens) {
      out << t.form << '\t' << t.pos << '\t' << (t.ezafe ? '1' : '0') << '\n';
    }
  }
}

std::string write_corpus(const Corpus& corpus) {
  std::ostringstream out;
  write_corpus(corpus, out);
  return out.str();
}

std::vector<std::size_t> shuffle_order(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

CorpusSplit shuffle_split(const Corpus& corpus, const SplitSpec& spec) {
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0) ||
      !(spec.valid_fraction > 0.0 && spec.valid_fraction < 1.0)) {
    throw UsageError("split fractions must lie in (0, 1)");
  }
  if (spec.test_fraction + spec.valid_fraction >= 1.0) {
    throw UsageError("test and validation fractions must sum to less than 1");
  }
  const std::size_t n = corpus.size();
  if (n < 3) throw DataError("splitting needs at least 3 sentences, got " + std::to_string(n));

  const auto n_test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * spec.test_fraction));
  const auto n_valid = static_cast<std::size_t>(std::floor(static_cast<double>(n) * spec.valid_fraction));
  if (n_test == 0 || n_valid == 0 || n_test + n_valid >= n) {
    throw DataError("split of " + std::to_string(n) + " sentences leaves an empty part");
  }

  const auto order = shuffle_order(n, spec.seed);
  const auto& all = corpus.sentences();
  std::vector<Sentence> test, valid, train;
  test.reserve(n_test);
  valid.reserve(n_valid);
  train.reserve(n - n_test - n_valid);
  for (std::size_t i = 0; i < n; ++i) {
    const Sentence& s = all[order[i]];
    if (i < n_test) {
      test.push_back(s);
    } else if (i < n_test + n_valid) {
      valid.push_back(s);
    } else {
      train.push_back(s);
    }
  }
  return CorpusSplit{Corpus::from_sentences(std::move(train)),
                     Corpus::from_sentences(std::move(valid)),
                     Corpus::from_sentences(std::move(test))};
}

Corpus filter_long(const Corpus& corpus, std::size_t max_len) {
  if (max_len == 0) throw UsageError("max_len must be at least 1");
  std::vector<Sentence> kept;
  kept.reserve(corpus.size());
  for (const auto& s : corpus.sentences()) {
    if (s.size() <= max_len) kept.push_back(s);
  }
  return Corpus::from_sentences(std::move(kept));
}

double shannon_index(const std::map<std::string, std::uint64_t>& counts) {
  if (counts.empty()) throw UsageError("shannon_index of an empty distribution");
  double total = 0.0;
  for (const auto& [form, c] : counts) {
    if (c == 0) throw UsageError("shannon_index count for '" + form + "' is zero");
    total += static_cast<double>(c);
  }
  double h = 0.0;
  for (const auto& [form, c] : counts) {
    const double p = static_cast<double>(c) / total;
    h -= p * std::log(p);
  }
  // -0.0 for the single-form case
  return h <= 0.0 ? 0.0 : h;
}

std::vector<PosStatsRow> corpus_stats(const Corpus& corpus) {
  if (corpus.empty()) throw UsageError("corpus_stats of an empty corpus");

  struct Tally {
    std::uint64_t tokens = 0;
    std::uint64_t ezafe = 0;
    std::map<std::string, std::uint64_t> forms;
  };
  std::unordered_map<std::string, Tally> by_tag;
  std::uint64_t total = 0;
  for (const auto& s : corpus.sentences()) {
    for (const auto& t : s.tokens) {
      auto& tally = by_tag[t.pos];
      ++tally.tokens;
      tally.ezafe += t.ezafe;
      ++tally.forms[t.form];
      ++total;
    }
  }

  std::vector<PosStatsRow> rows;
  rows.reserve(corpus.tag_inventory().size());
  for (const auto& tag : corpus.tag_inventory()) {
    const auto& tally = by_tag.at(tag);
    rows.push_back(PosStatsRow{
        tag,
        100.0 * static_cast<double>(tally.ezafe) / static_cast<double>(tally.tokens),
        100.0 * static_cast<double>(tally.tokens) / static_cast<double>(total),
        shannon_index(tally.forms)});
  }
  std::sort(rows.begin(), rows.end(), [](const PosStatsRow& a, const PosStatsRow& b) {
    if (a.ezafe_pct != b.ezafe_pct) return a.ezafe_pct > b.ezafe_pct;
    return a.pos < b.pos;
  });
  return rows;
}

std::string format_stats(const std::vector<PosStatsRow>& rows) {
  std::string out = "pos\tezafe_pct\tfreq_pct\tH\n";
  for (const auto& r : rows) {
    out += r.pos + '\t' + text::fixed(r.ezafe_pct, 2) + '\t' + text::fixed(r.freq_pct, 2) +
           '\t' + text::fixed(r.diversity, 3) + '\n';
  }
  return out;
}

}  // namespace pert
