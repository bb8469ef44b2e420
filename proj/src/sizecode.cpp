#include "srf/sizecode.hpp"

#include <bit>

#include "srf/error.hpp"

namespace srf {

BigInt binomial(std::uint64_t n, std::uint64_t r) {
  if (r > n) return 0;
  r = std::min(r, n - r);
  BigInt c = 1;
  for (std::uint64_t i = 1; i <= r; ++i) {
    c *= n - r + i;
    c /= i;
  }
  return c;
}

unsigned ceil_log2(const BigInt& n) {
  if (n <= 1) return 0;
  return static_cast<unsigned>(boost::multiprecision::msb(BigInt(n - 1))) + 1;
}

GrammarSizeBreakdown grammar_size_bits(std::uint32_t k, std::uint64_t r) {
  if (k == 0) fail(Errc::kRuleCountOutOfRange, "k must be positive");
  const std::uint64_t u = universe_size(k);
  if (r < 1 || r > u) {
    fail(Errc::kRuleCountOutOfRange, "r=" + std::to_string(r) + " outside [1, " + std::to_string(u) + "]");
  }
  GrammarSizeBreakdown s;
  s.gamma_bits = 2 * static_cast<unsigned>(std::bit_width(k) - 1) + 1;
  s.rulecount_bits = ceil_log2(BigInt(u) + 1);
  s.subset_bits = ceil_log2(binomial(u, r));
  s.total = s.gamma_bits + s.rulecount_bits + s.subset_bits;
  return s;
}

void elias_gamma_encode(std::uint64_t n, Bitstream& out) {
  if (n == 0) fail(Errc::kMalformedCode, "Elias gamma needs n >= 1");
  const unsigned width = static_cast<unsigned>(std::bit_width(n));
  for (unsigned i = 1; i < width; ++i) out.push_back(false);
  out.append(n, width);
}

Bitstream elias_gamma_encode(std::uint64_t n) {
  Bitstream out;
  elias_gamma_encode(n, out);
  return out;
}

std::uint64_t elias_gamma_decode(BitReader& in) {
  unsigned zeros = 0;
  while (true) {
    if (in.exhausted()) fail(Errc::kMalformedCode, "truncated Elias gamma code");
    if (in.read()) break;
    if (++zeros > 63) fail(Errc::kMalformedCode, "Elias gamma prefix too long");
  }
  std::uint64_t v = 1;
  for (unsigned i = 0; i < zeros; ++i) {
    if (in.exhausted()) fail(Errc::kMalformedCode, "truncated Elias gamma code");
    v = (v << 1) | static_cast<std::uint64_t>(in.read());
  }
  return v;
}

std::pair<std::uint64_t, std::size_t> elias_gamma_decode(const Bitstream& bits) {
  BitReader in(bits);
  const std::uint64_t n = elias_gamma_decode(in);
  return {n, in.position()};
}

BigInt subset_rank(std::uint64_t universe, const std::vector<std::uint64_t>& subset) {
  BigInt rank = 0;
  for (std::size_t i = 0; i < subset.size(); ++i) {
    if (subset[i] >= universe || (i > 0 && subset[i] <= subset[i - 1])) {
      fail(Errc::kRankOutOfRange, "subset must be strictly increasing indices below " + std::to_string(universe));
    }
    rank += binomial(subset[i], i + 1);
  }
  return rank;
}

std::vector<std::uint64_t> subset_unrank(std::uint64_t universe, std::uint64_t r, const BigInt& rank) {
  if (r > universe || rank < 0 || rank >= binomial(universe, r)) {
    fail(Errc::kRankOutOfRange, "rank outside [0, C(" + std::to_string(universe) + ", " + std::to_string(r) + "))");
  }
  std::vector<std::uint64_t> out(r);
  BigInt rest = rank;
  std::uint64_t bound = universe;  // exclusive
  for (std::uint64_t i = r; i >= 1; --i) {
    // Largest c in [i-1, bound) with C(c, i) <= rest.
    std::uint64_t lo = i - 1, hi = bound - 1;
    while (lo < hi) {
      const std::uint64_t mid = lo + (hi - lo + 1) / 2;
      if (binomial(mid, i) <= rest) {
        lo = mid;
      } else {
        hi = mid - 1;
      }
    }
    out[i - 1] = lo;
    rest -= binomial(lo, i);
    bound = lo;
  }
  return out;
}

BigInt uniform_below(const BigInt& bound, std::mt19937_64& rng) {
  if (bound <= 1) return 0;
  const unsigned bits = ceil_log2(bound);
  while (true) {
    BigInt v = 0;
    unsigned have = 0;
    while (have < bits) {
      const unsigned take = std::min(64u, bits - have);
      std::uint64_t draw = rng();
      if (take < 64) draw >>= 64 - take;
      v = (v << take) | draw;
      have += take;
    }
    if (v < bound) return v;
  }
}

Bitstream serialize_grammar(const SrfGrammar& g) {
  const std::uint32_t k = g.nonterminals();
  const GrammarSizeBreakdown size = grammar_size_bits(k, g.size());
  Bitstream out;
  elias_gamma_encode(k, out);
  out.append(g.size(), size.rulecount_bits);
  const BigInt rank = subset_rank(universe_size(k), g.universe_indices());
  for (unsigned b = size.subset_bits; b-- > 0;) out.push_back(boost::multiprecision::bit_test(rank, b));
  return out;
}

SrfGrammar deserialize_grammar(const Bitstream& bits) {
  BitReader in(bits);
  const std::uint64_t k = elias_gamma_decode(in);
  if (k > 1'000'000) fail(Errc::kMalformedCode, "implausible nonterminal count");
  const std::uint64_t u = universe_size(static_cast<std::uint32_t>(k));
  const unsigned rule_bits = ceil_log2(BigInt(u) + 1);
  if (in.position() + rule_bits > bits.size()) fail(Errc::kMalformedCode, "truncated rule count");
  const std::uint64_t r = in.read(rule_bits);
  if (r < 1 || r > u) fail(Errc::kMalformedCode, "rule count out of range");
  const unsigned subset_bits = ceil_log2(binomial(u, r));
  if (in.position() + subset_bits > bits.size()) fail(Errc::kMalformedCode, "truncated subset rank");
  BigInt rank = 0;
  for (unsigned b = 0; b < subset_bits; ++b) rank = (rank << 1) | static_cast<unsigned>(in.read());
  if (rank >= binomial(u, r)) fail(Errc::kMalformedCode, "subset rank out of range");
  return grammar_from_sorted_universe(static_cast<std::uint32_t>(k), subset_unrank(u, r, rank));
}

}  // namespace srf
