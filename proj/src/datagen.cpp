#include "pert/datagen.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include "pert/crf.hpp"
#include "pert/error.hpp"
#include "pert/random.hpp"
#include "pert/text.hpp"

namespace pert {
namespace {

constexpr double kStochasticTolerance = 1e-12;

void check_distribution(std::span<const double> row, const std::string& where) {
  double sum = 0.0;
  for (double p : row) {
    if (!std::isfinite(p) || p < 0.0) throw DataError(where + " has a negative or non-finite entry");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kStochasticTolerance) {
    throw DataError(where + " sums to " + text::shortest(sum) + ", not 1");
  }
}

void check_names(const std::vector<std::string>& names, const char* what) {
  std::unordered_set<std::string_view> seen;
  for (const auto& n : names) {
    if (n.empty() || n.find_first_of(" \t\r\n") != std::string::npos) {
      throw DataError(std::string(what) + " entry '" + n + "' is empty or contains blanks");
    }
    if (!seen.insert(n).second) throw DataError(std::string(what) + " entry '" + n + "' repeated");
  }
}

std::size_t sample(std::mt19937_64& rng, std::span<const double> probs) {
  const double u = uniform_unit(rng);
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    acc += probs[i];
    last_positive = i;
    if (u < acc) return i;
  }
  return last_positive;
}

}  // namespace

void HmmSpec::validate() const {
  const std::size_t S = states.size();
  if (S == 0) throw DataError("STATES is empty");
  check_names(states, "STATES");
  if (vocabulary.empty()) throw DataError("EMIT vocabulary is empty");
  check_names(vocabulary, "EMIT vocabulary");
  if (start.size() != S) throw DataError("START has " + std::to_string(start.size()) + " entries, expected " + std::to_string(S));
  check_distribution(start, "START");
  if (trans.size() != S) throw DataError("TRANS has " + std::to_string(trans.size()) + " rows, expected " + std::to_string(S));
  if (emit.size() != S) throw DataError("EMIT has " + std::to_string(emit.size()) + " rows, expected " + std::to_string(S));
  if (ezafe.size() != S) throw DataError("EZAFE has " + std::to_string(ezafe.size()) + " rows, expected " + std::to_string(S));
  for (std::size_t s = 0; s < S; ++s) {
    const std::string row = " row " + std::to_string(s + 1) + " (" + states[s] + ")";
    if (trans[s].size() != S) throw DataError("TRANS" + row + " has wrong length");
    check_distribution(trans[s], "TRANS" + row);
    if (emit[s].size() != vocabulary.size()) throw DataError("EMIT" + row + " has wrong length");
    check_distribution(emit[s], "EMIT" + row);
    if (ezafe[s].size() != S) throw DataError("EZAFE" + row + " has wrong length");
    for (double p : ezafe[s]) {
      if (!(p >= 0.0 && p <= 1.0)) throw DataError("EZAFE" + row + " has an entry outside [0, 1]");
    }
  }
}

HmmSpec parse_hmm_spec(std::string_view text) {
  std::unordered_map<std::string, std::vector<std::pair<std::size_t, std::vector<std::string_view>>>> blocks;
  std::string current;
  std::size_t line_no = 0;
  for (auto raw : text::split(text, '\n')) {
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const auto line = text::trim(raw);
    if (line.empty()) continue;
    if (line == "STATES" || line == "START" || line == "TRANS" || line == "EMIT" || line == "EZAFE") {
      current = std::string(line);
      if (blocks.count(current)) throw ParseError(line_no, "section " + current + " repeated");
      blocks[current];
      continue;
    }
    if (current.empty()) throw ParseError(line_no, "content before the first section header");
    blocks[current].emplace_back(line_no, text::split_ws(line));
  }
  for (const char* name : {"STATES", "START", "TRANS", "EMIT", "EZAFE"}) {
    if (!blocks.count(name)) throw DataError(std::string("missing section ") + name);
  }

  auto numbers = [](const std::pair<std::size_t, std::vector<std::string_view>>& row) {
    std::vector<double> out;
    for (auto f : row.second) {
      const auto v = text::parse_double(f);
      if (!v) throw ParseError(row.first, "bad number '" + std::string(f) + "'");
      out.push_back(*v);
    }
    return out;
  };
  auto single_line = [&](const char* name) -> const auto& {
    const auto& rows = blocks.at(name);
    if (rows.size() != 1) throw DataError(std::string(name) + " must be a single line");
    return rows.front();
  };

  HmmSpec spec;
  for (auto s : single_line("STATES").second) spec.states.emplace_back(s);
  spec.start = numbers(single_line("START"));
  for (const auto& row : blocks.at("TRANS")) spec.trans.push_back(numbers(row));
  const auto& emit_rows = blocks.at("EMIT");
  if (emit_rows.empty()) throw DataError("EMIT needs a vocabulary line");
  for (auto w : emit_rows.front().second) spec.vocabulary.emplace_back(w);
  for (std::size_t i = 1; i < emit_rows.size(); ++i) spec.emit.push_back(numbers(emit_rows[i]));
  for (const auto& row : blocks.at("EZAFE")) spec.ezafe.push_back(numbers(row));
  spec.validate();
  return spec;
}

HmmSpec read_hmm_spec_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open spec file '" + path + "'");
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse_hmm_spec(text);
}

std::string write_hmm_spec(const HmmSpec& spec) {
  auto row = [](std::span<const double> values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) out += (i ? " " : "") + text::shortest(values[i]);
    return out + '\n';
  };
  auto words = [](const std::vector<std::string>& ws) {
    std::string out;
    for (std::size_t i = 0; i < ws.size(); ++i) out += (i ? " " : "") + ws[i];
    return out + '\n';
  };
  std::string out = "STATES\n" + words(spec.states) + "START\n" + row(spec.start) + "TRANS\n";
  for (const auto& r : spec.trans) out += row(r);
  out += "EMIT\n" + words(spec.vocabulary);
  for (const auto& r : spec.emit) out += row(r);
  out += "EZAFE\n";
  for (const auto& r : spec.ezafe) out += row(r);
  return out;
}

void LengthModel::validate() const {
  if (min_length == 0 || max_length < min_length) throw UsageError("length range must satisfy 1 <= min <= max");
  if (!(stop_probability > 0.0 && stop_probability <= 1.0)) {
    throw UsageError("length stop probability must lie in (0, 1]");
  }
}

double LengthModel::probability(std::size_t n) const {
  if (n < min_length || n > max_length) return 0.0;
  const double q = 1.0 - stop_probability;
  const double span = static_cast<double>(max_length - min_length + 1);
  const double mass = q == 0.0 ? 1.0 : 1.0 - std::pow(q, span);
  return std::pow(q, static_cast<double>(n - min_length)) * stop_probability / mass;
}

Corpus generate(const HmmSpec& spec, std::size_t n_sentences, const LengthModel& lengths,
                std::uint64_t seed) {
  spec.validate();
  lengths.validate();
  std::vector<double> length_probs;
  for (std::size_t n = lengths.min_length; n <= lengths.max_length; ++n) {
    length_probs.push_back(lengths.probability(n));
  }

  std::vector<Sentence> sentences;
  sentences.reserve(n_sentences);
  const std::uint64_t base = splitmix64(seed);
  for (std::size_t i = 0; i < n_sentences; ++i) {
    std::mt19937_64 rng(splitmix64(base + i));
    const std::size_t n = lengths.min_length + sample(rng, length_probs);
    std::vector<std::size_t> path(n);
    Sentence s;
    s.tokens.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
      path[t] = sample(rng, t == 0 ? std::span<const double>(spec.start)
                                   : std::span<const double>(spec.trans[path[t - 1]]));
      s.tokens[t].pos = spec.states[path[t]];
      s.tokens[t].form = spec.vocabulary[sample(rng, spec.emit[path[t]])];
    }
    for (std::size_t t = 0; t + 1 < n; ++t) {
      s.tokens[t].ezafe = uniform_unit(rng) < spec.ezafe[path[t]][path[t + 1]] ? 1 : 0;
    }
    sentences.push_back(std::move(s));
  }
  return Corpus::from_sentences(std::move(sentences));
}

double expected_ezafe_rate(const HmmSpec& spec, const LengthModel& lengths) {
  spec.validate();
  lengths.validate();
  const std::size_t S = spec.states.size();
  std::vector<double> rate_from(S, 0.0);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t n = 0; n < S; ++n) rate_from[s] += spec.trans[s][n] * spec.ezafe[s][n];
  }
  // `cumulative` is the expected ezafe count over positions 0..len-2.
  std::vector<double> p(spec.start), next(S);
  double expected_ezafe = 0.0, expected_tokens = 0.0, cumulative = 0.0;
  for (std::size_t len = 1; len <= lengths.max_length; ++len) {
    // A sentence of length len has ezafe opportunities at positions 0..len-2.
    const double q = lengths.probability(len);
    expected_ezafe += q * cumulative;
    expected_tokens += q * static_cast<double>(len);
    double e = 0.0;
    for (std::size_t s = 0; s < S; ++s) e += p[s] * rate_from[s];
    cumulative += e;
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t n = 0; n < S; ++n) next[n] += p[s] * spec.trans[s][n];
    }
    p.swap(next);
  }
  return expected_ezafe / expected_tokens;
}

std::vector<std::string> bayes_decode(const HmmSpec& spec, std::span<const std::string> words) {
  if (words.empty()) return {};
  std::unordered_map<std::string_view, std::size_t> vocab;
  for (std::size_t i = 0; i < spec.vocabulary.size(); ++i) vocab.emplace(spec.vocabulary[i], i);
  const std::size_t S = spec.states.size();

  // An HMM's posterior is a linear-chain lattice with log-probability scores.
  Lattice lat(words.size(), S);
  for (std::size_t t = 0; t < words.size(); ++t) {
    const auto it = vocab.find(words[t]);
    if (it == vocab.end()) throw DataError("word '" + words[t] + "' is not in the spec vocabulary");
    for (std::size_t s = 0; s < S; ++s) {
      lat.emit(t, s) = std::log(spec.emit[s][it->second]) + (t == 0 ? std::log(spec.start[s]) : 0.0);
    }
  }
  for (std::size_t a = 0; a < S; ++a) {
    for (std::size_t b = 0; b < S; ++b) lat.trans(a, b) = std::log(spec.trans[a][b]);
  }
  const auto fwd = forward(lat);
  const auto bwd = backward(lat);
  if (!std::isfinite(fwd.log_z)) throw DataError("word sequence has zero probability under the spec");

  std::vector<std::string> out;
  out.reserve(words.size());
  for (std::size_t t = 0; t < words.size(); ++t) {
    std::size_t best = 0;
    double best_score = fwd.alpha[t * S] + bwd.beta[t * S];
    for (std::size_t s = 1; s < S; ++s) {
      const double score = fwd.alpha[t * S + s] + bwd.beta[t * S + s];
      if (score > best_score) {
        best_score = score;
        best = s;
      }
    }
    out.push_back(spec.states[best]);
  }
  return out;
}

namespace {

// Pseudo-Persian transliterated word pieces; several are multi-byte in UTF-8.
constexpr std::string_view kSyllables[] = {"ba", "ka", "ra", "mā", "še", "xo", "di", "na", "pe",
                                           "zu", "tā", "lo", "sa", "ğo", "fi", "ju", "he", "vo"};

std::string make_word(std::mt19937_64& rng, std::string_view ending) {
  std::string w;
  const auto syllables = 1 + uniform_below(rng, 2);
  for (std::uint64_t k = 0; k < syllables; ++k) {
    w += kSyllables[uniform_below(rng, std::size(kSyllables))];
  }
  return w + std::string(ending);
}

std::vector<double> normalized(std::vector<double> v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  if (sum <= 0.0) return v;
  for (double& x : v) x /= sum;
  // Push the rounding residue into the largest entry so the row sums to 1.
  double total = 0.0;
  std::size_t big = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    total += v[i];
    if (v[i] > v[big]) big = i;
  }
  v[big] += 1.0 - total;
  return v;
}

std::vector<double> random_weights(std::mt19937_64& rng, std::size_t n, double floor) {
  std::vector<double> v(n);
  for (double& x : v) x = floor + uniform_unit(rng);
  return v;
}

// Assigns `per_state[s]` fresh words to each state and `shared` words to all
// states, then spreads `own_mass` of each emission row over its own words.
void fill_emissions(HmmSpec& spec, std::mt19937_64& rng, const std::vector<std::size_t>& per_state,
                    const std::vector<std::string>& endings, std::size_t shared, double own_mass,
                    const std::vector<int>& emission_group) {
  const std::size_t S = spec.states.size();
  std::unordered_set<std::string> used;
  auto fresh = [&](std::string_view ending) {
    while (true) {
      auto w = make_word(rng, ending);
      if (used.insert(w).second) return w;
    }
  };
  std::vector<std::vector<std::size_t>> own(S);
  std::vector<std::vector<double>> own_weights(S);
  for (std::size_t s = 0; s < S; ++s) {
    const auto group = static_cast<std::size_t>(emission_group[s]);
    if (group != s) continue;  // shares the row of an earlier state
    for (std::size_t k = 0; k < per_state[s]; ++k) {
      own[s].push_back(spec.vocabulary.size());
      spec.vocabulary.push_back(fresh(endings[s]));
    }
    own_weights[s] = random_weights(rng, per_state[s], 0.2);
  }
  std::vector<std::size_t> pool;
  for (std::size_t k = 0; k < shared; ++k) {
    pool.push_back(spec.vocabulary.size());
    spec.vocabulary.push_back(fresh(""));
  }
  spec.emit.assign(S, std::vector<double>(spec.vocabulary.size(), 0.0));
  for (std::size_t s = 0; s < S; ++s) {
    const auto group = static_cast<std::size_t>(emission_group[s]);
    if (group != s) {
      spec.emit[s] = spec.emit[group];
      continue;
    }
    if (own[s].empty() && pool.empty()) continue;  // caller fills this row
    const auto own_probs = normalized(own_weights[s]);
    const auto pool_probs = pool.empty() ? std::vector<double>{} : normalized(random_weights(rng, pool.size(), 0.2));
    const double mass = pool.empty() ? 1.0 : own_mass;
    for (std::size_t k = 0; k < own[s].size(); ++k) spec.emit[s][own[s][k]] = mass * own_probs[k];
    for (std::size_t k = 0; k < pool.size(); ++k) spec.emit[s][pool[k]] = (1.0 - mass) * pool_probs[k];
    spec.emit[s] = normalized(spec.emit[s]);
  }
}

HmmSpec basic_spec() {
  HmmSpec spec;
  spec.states = {"N", "ADJ", "V", "P"};
  spec.start = {0.4, 0.1, 0.1, 0.4};
  spec.trans = {{0.35, 0.30, 0.25, 0.10},
                {0.30, 0.15, 0.40, 0.15},
                {0.40, 0.10, 0.10, 0.40},
                {0.70, 0.15, 0.10, 0.05}};
  spec.ezafe = {{0.32, 0.80, 0.00, 0.05},
                {0.25, 0.30, 0.00, 0.00},
                {0.00, 0.00, 0.00, 0.00},
                {0.50, 0.30, 0.00, 0.00}};
  std::mt19937_64 rng(17);
  fill_emissions(spec, rng, {60, 40, 40, 20}, {"ān", "i", "ad", ""}, 40, 0.8, {0, 1, 2, 3});
  return spec;
}

// ADJ and ADV emit from one shared distribution and have identical outgoing
// transitions; only the ezafe on the preceding N (and on ADJ itself) tells
// them apart.
HmmSpec homograph_spec() {
  HmmSpec spec;
  spec.states = {"N", "ADJ", "ADV", "V", "DELM"};
  spec.start = {0.5, 0.1, 0.1, 0.2, 0.1};
  spec.trans = {{0.20, 0.30, 0.30, 0.10, 0.10},
                {0.20, 0.05, 0.05, 0.50, 0.20},
                {0.20, 0.05, 0.05, 0.50, 0.20},
                {0.50, 0.10, 0.10, 0.10, 0.20},
                {0.60, 0.10, 0.10, 0.20, 0.00}};
  spec.ezafe = {{0.50, 1.00, 0.00, 0.00, 0.00},
                {0.30, 0.50, 0.00, 0.00, 0.00},
                {0.00, 0.00, 0.00, 0.00, 0.00},
                {0.00, 0.00, 0.00, 0.00, 0.00},
                {0.00, 0.00, 0.00, 0.00, 0.00}};
  std::mt19937_64 rng(29);
  fill_emissions(spec, rng, {50, 40, 0, 30, 0}, {"ān", "āne", "", "ad", ""}, 0, 1.0, {0, 1, 1, 3, 4});
  // Punctuation for DELM, including the Arabic-script comma.
  const std::size_t V = spec.vocabulary.size();
  for (const char* p : {".", "،", "؟"}) spec.vocabulary.emplace_back(p);
  for (auto& row : spec.emit) row.resize(spec.vocabulary.size(), 0.0);
  spec.emit[4] = std::vector<double>(spec.vocabulary.size(), 0.0);
  spec.emit[4][V] = 0.6;
  spec.emit[4][V + 1] = 0.3;
  spec.emit[4][V + 2] = 0.1;
  spec.emit[4] = normalized(spec.emit[4]);
  return spec;
}

}  // namespace

HmmSpec preset_spec(std::string_view name) {
  HmmSpec spec;
  if (name == "basic") {
    spec = basic_spec();
  } else if (name == "homograph") {
    spec = homograph_spec();
  } else {
    throw UsageError("unknown preset '" + std::string(name) + "'");
  }
  spec.validate();
  return spec;
}

std::vector<std::string> preset_names() { return {"basic", "homograph"}; }

HmmSpec random_spec(std::size_t n_states, std::size_t vocab_size, std::uint64_t seed) {
  if (n_states == 0 || vocab_size < n_states) throw UsageError("random_spec needs vocab_size >= n_states >= 1");
  std::mt19937_64 rng(seed);
  HmmSpec spec;
  for (std::size_t s = 0; s < n_states; ++s) spec.states.push_back("S" + std::to_string(s));
  spec.start = normalized(random_weights(rng, n_states, 0.1));
  for (std::size_t s = 0; s < n_states; ++s) spec.trans.push_back(normalized(random_weights(rng, n_states, 0.05)));
  for (std::size_t s = 0; s < n_states; ++s) {
    std::vector<double> row(n_states);
    for (double& p : row) p = uniform_unit(rng) < 0.5 ? 0.0 : uniform_unit(rng);
    spec.ezafe.push_back(row);
  }
  const std::size_t shared = vocab_size / 5;
  const std::size_t own_total = vocab_size - shared;
  std::vector<std::size_t> per_state(n_states, own_total / n_states);
  for (std::size_t s = 0; s < own_total % n_states; ++s) ++per_state[s];
  std::vector<std::string> endings;
  std::vector<int> groups;
  for (std::size_t s = 0; s < n_states; ++s) {
    endings.emplace_back(kSyllables[(5 * s + 3) % std::size(kSyllables)]);
    groups.push_back(static_cast<int>(s));
  }
  fill_emissions(spec, rng, per_state, endings, shared, 0.8, groups);
  spec.validate();
  return spec;
}

}  // namespace pert
