#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pert/corpus.hpp"

namespace pert {

/// Hidden-Markov generator of tagged, ezafe-annotated sentences.
///
/// States are POS tags. A token in state s followed by a token in state s'
/// carries ezafe with probability ezafe[s][s']; sentence-final tokens never do.
struct HmmSpec {
  std::vector<std::string> states;
  std::vector<double> start;                // S
  std::vector<std::vector<double>> trans;   // S x S, row-stochastic
  std::vector<std::string> vocabulary;      // V
  std::vector<std::vector<double>> emit;    // S x V, row-stochastic
  std::vector<std::vector<double>> ezafe;   // S x S, entries in [0, 1]

  /// Throws DataError naming the first violated row.
  void validate() const;
};

/// Block format with sections STATES, START, TRANS, EMIT, EZAFE. `#` starts a
/// comment. STATES and START are one line each; TRANS and EZAFE hold one
/// line per state; EMIT's first line is the vocabulary followed by one line
/// per state.
HmmSpec parse_hmm_spec(std::string_view text);
HmmSpec read_hmm_spec_file(const std::string& path);
std::string write_hmm_spec(const HmmSpec& spec);

/// Geometric length distribution truncated to [min_length, max_length].
struct LengthModel {
  std::size_t min_length = 3;
  std::size_t max_length = 40;
  double stop_probability = 0.1;

  void validate() const;
  /// P(length = n) for n in [min_length, max_length].
  double probability(std::size_t n) const;
};

/// Sentence i draws from its own stream derived from (seed, i).
Corpus generate(const HmmSpec& spec, std::size_t n_sentences, const LengthModel& lengths,
                std::uint64_t seed);

/// Expected fraction of ezafe-bearing tokens under the generator.
double expected_ezafe_rate(const HmmSpec& spec, const LengthModel& lengths);

/// Per-token argmax of posterior state marginals given the words (ties to the
/// lower state index). Throws DataError on a word outside the vocabulary.
std::vector<std::string> bayes_decode(const HmmSpec& spec, std::span<const std::string> words);

/// Named built-in specs: "basic" (4 states, 200 words, ~22% ezafe) and
/// "homograph" (two states share emissions and differ only in ezafe).
HmmSpec preset_spec(std::string_view name);
std::vector<std::string> preset_names();

/// Random spec with distinct per-state vocabularies plus a shared pool of
/// ambiguous words; deterministic in `seed`.
HmmSpec random_spec(std::size_t n_states, std::size_t vocab_size, std::uint64_t seed);

}  // namespace pert
