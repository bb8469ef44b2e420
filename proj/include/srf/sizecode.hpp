#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "srf/bits.hpp"
#include "srf/grammar.hpp"

namespace srf {

using BigInt = boost::multiprecision::cpp_int;

BigInt binomial(std::uint64_t n, std::uint64_t r);

// ceil(log2 n) for n >= 1, i.e. the bits needed to index n values.
unsigned ceil_log2(const BigInt& n);

struct GrammarSizeBreakdown {
  unsigned gamma_bits = 0;      // Elias gamma code of k
  unsigned rulecount_bits = 0;  // r in ceil(log2(U + 1)) bits
  unsigned subset_bits = 0;     // ceil(log2 C(U, r))
  unsigned total = 0;
};

// Throws RuleCountOutOfRange unless 1 <= r <= |rule_universe(k)|.
GrammarSizeBreakdown grammar_size_bits(std::uint32_t k, std::uint64_t r);

void elias_gamma_encode(std::uint64_t n, Bitstream& out);
Bitstream elias_gamma_encode(std::uint64_t n);
// Returns (n, bits consumed). Throws MalformedCode.
std::pair<std::uint64_t, std::size_t> elias_gamma_decode(const Bitstream& bits);
std::uint64_t elias_gamma_decode(BitReader& in);

// Colexicographic rank of a strictly increasing index list.
BigInt subset_rank(std::uint64_t universe, const std::vector<std::uint64_t>& subset);
std::vector<std::uint64_t> subset_unrank(std::uint64_t universe, std::uint64_t r, const BigInt& rank);

// Uniform integer in [0, bound) by rejection sampling on whole 64-bit draws.
BigInt uniform_below(const BigInt& bound, std::mt19937_64& rng);

// gamma(k), r, then the colex rank of the rule set within rule_universe(k).
Bitstream serialize_grammar(const SrfGrammar& g);
SrfGrammar deserialize_grammar(const Bitstream& bits);

}  // namespace srf
