#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "srf/codec.hpp"
#include "srf/data.hpp"
#include "srf/grammar.hpp"
#include "srf/sizecode.hpp"

namespace srf {

// Number of SRF grammars with k nonterminals and r rules: C(U(k), r).
BigInt count_grammars(std::uint32_t k, std::uint64_t r);

// Walks the size-r subsets of rule_universe(k) in colex rank order.
class GrammarEnumerator {
 public:
  GrammarEnumerator(std::uint32_t k, std::uint64_t r, const BigInt& first_rank = 0);

  bool done() const { return done_; }
  const std::vector<std::uint64_t>& indices() const { return indices_; }
  const BigInt& rank() const { return rank_; }
  SrfGrammar grammar() const { return grammar_from_sorted_universe(k_, indices_); }
  void next();

 private:
  std::uint32_t k_;
  std::uint64_t universe_;
  std::vector<std::uint64_t> indices_;
  BigInt rank_;
  bool done_ = false;
};

void enumerate_exhaustive(std::uint32_t k, std::uint64_t r, const std::function<void(const SrfGrammar&)>& visit);

// Uniform over the size-r subsets of the rule universe.
SrfGrammar random_grammar(std::uint32_t k, std::uint64_t r, std::mt19937_64& rng);

// ceil(fraction * n) records without replacement, kept in input order.
std::vector<RnaRecord> subsample(const std::vector<RnaRecord>& dataset, double fraction, std::uint64_t seed);

// Distinct balanced substructures without "()" of length <= max_length,
// shortest first, capped at `cap`; bases come from the first occurrence.
std::vector<RnaRecord> build_parsable_set(const std::vector<RnaRecord>& benchmark, std::size_t max_length = 10,
                                          std::size_t cap = 30);

enum class SearchMode : std::uint8_t { kExhaustive, kRandom };

struct SearchConfig {
  SearchMode mode = SearchMode::kExhaustive;
  std::uint32_t k_min = 1, k_max = 1;
  std::uint64_t r_min = 1, r_max = 1;
  std::size_t top = 10;          // m
  std::uint64_t budget = 1000;   // random mode: grammars drawn
  std::uint64_t seed = 1;
  ModelKind model_kind = ModelKind::kAdaptive;
  ExpansionMode expansion = ExpansionMode::kCanonical6;
  std::size_t threads = 1;
  // Grammars per batch. Stage-2 thresholds use the top list as it stood at
  // the start of the batch, which keeps results independent of `threads`.
  std::size_t batch = 256;
  bool stage2_threshold = true;
  std::string checkpoint;  // empty: none
};

struct SearchInputs {
  std::vector<RnaRecord> parsable;
  std::vector<RnaRecord> small;
  std::vector<RnaRecord> benchmark;
};

struct RankedGrammar {
  SrfGrammar grammar;
  BigInt rank;  // colex rank within (k, r)
  double small_bpb = 0.0;
  double benchmark_bpb = 0.0;
};

struct SearchCounters {
  std::uint64_t generated = 0;
  std::uint64_t parse_filtered = 0;
  std::uint64_t small_filtered = 0;
  std::uint64_t benchmarked = 0;

  bool operator==(const SearchCounters&) const = default;
};

struct SearchResult {
  std::vector<RankedGrammar> ranked;  // by benchmark bpb, then (k, r, rank)
  SearchCounters counters;
};

// Stage 1: parse every parsable structure; stage 2: bits per base on the
// small set, dropped when the list is full and it is worse than the small
// score of the current worst member; stage 3: benchmark bits per base,
// which orders the top list. Throws InvalidConfig.
SearchResult run_search(const SearchConfig& cfg, const SearchInputs& inputs);

std::string format_search_csv(const SearchResult& result);

// Bits per base of one grammar on a dataset, +inf when a record is unparseable.
double grammar_bpb(const SrfGrammar& g, const std::vector<RnaRecord>& dataset, ModelKind kind, ExpansionMode mode);
bool parses_all(const SrfGrammar& g, const std::vector<RnaRecord>& structures);

}  // namespace srf
