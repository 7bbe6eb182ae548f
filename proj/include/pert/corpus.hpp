#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace pert {

struct Token {
  std::string form;
  std::string pos;
  std::uint8_t ezafe = 0;

  friend bool operator==(const Token&, const Token&) = default;
};

struct Sentence {
  std::vector<Token> tokens;

  std::size_t size() const noexcept { return tokens.size(); }
  std::vector<std::string> forms() const;
  std::vector<std::string> tags() const;
  std::vector<std::uint8_t> ezafe_flags() const;

  friend bool operator==(const Sentence&, const Sentence&) = default;
};

/// Ordered sentences plus the POS inventory in first-occurrence order.
///
/// The inventory is derived from the sentences; build through
/// Corpus::from_sentences (or the parser) so the two never disagree.
class Corpus {
 public:
  Corpus() = default;
  static Corpus from_sentences(std::vector<Sentence> sentences);

  const std::vector<Sentence>& sentences() const noexcept { return sentences_; }
  const std::vector<std::string>& tag_inventory() const noexcept { return tags_; }

  std::size_t size() const noexcept { return sentences_.size(); }
  bool empty() const noexcept { return sentences_.empty(); }
  std::size_t token_count() const noexcept;

  friend bool operator==(const Corpus&, const Corpus&) = default;

 private:
  std::vector<Sentence> sentences_;
  std::vector<std::string> tags_;
};

/// Reads the canonical three-column TSV format (form, pos, ezafe).
/// Throws ParseError naming the offending line.
Corpus parse_corpus(std::istream& in);
Corpus parse_corpus(std::string_view text);
Corpus read_corpus_file(const std::string& path);

std::string write_corpus(const Corpus& corpus);
void write_corpus(const Corpus& corpus, std::ostream& out);

struct SplitSpec {
  std::uint64_t seed = 17;
  double test_fraction = 0.1;
  double valid_fraction = 0.1;
};

struct CorpusSplit {
  Corpus train;
  Corpus valid;
  Corpus test;
};

/// Seeded Fisher-Yates shuffle over sentences, then test | valid | train
/// carved off the front in that order using floor(n * fraction).
CorpusSplit shuffle_split(const Corpus& corpus, const SplitSpec& spec);

/// The permutation applied by shuffle_split: entry i is the source index of
/// the i-th shuffled sentence.
std::vector<std::size_t> shuffle_order(std::size_t n, std::uint64_t seed);

/// Drops sentences longer than `max_len` tokens.
Corpus filter_long(const Corpus& corpus, std::size_t max_len);

/// Shannon diversity index in nats.
double shannon_index(const std::map<std::string, std::uint64_t>& counts);

struct PosStatsRow {
  std::string pos;
  double ezafe_pct = 0.0;
  double freq_pct = 0.0;
  double diversity = 0.0;
};

/// One row per tag, sorted by descending ezafe_pct then tag symbol.
std::vector<PosStatsRow> corpus_stats(const Corpus& corpus);

/// TSV rendering with header `pos ezafe_pct freq_pct H`.
std::string format_stats(const std::vector<PosStatsRow>& rows);

}  // namespace pert
