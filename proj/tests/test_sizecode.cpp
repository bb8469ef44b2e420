#include <random>

#include "oracles.hpp"
#include "srf/search.hpp"
#include "srf/sizecode.hpp"
#include "test_util.hpp"

using namespace srf;

TEST_CASE("elias gamma") {
  CHECK(elias_gamma_encode(1).to_string() == "1");
  CHECK(elias_gamma_encode(2).to_string() == "010");
  CHECK(elias_gamma_encode(5).to_string() == "00101");
  CHECK(elias_gamma_encode(108).size() == 13);
  for (std::uint64_t n : {1ull, 2ull, 3ull, 7ull, 8ull, 1000ull, (1ull << 40) + 3, ~0ull}) {
    const auto bits = elias_gamma_encode(n);
    const auto [v, used] = elias_gamma_decode(bits);
    CHECK(v == n);
    CHECK(used == bits.size());
  }
  CHECK_ERRC(elias_gamma_encode(0), Errc::kMalformedCode);
  CHECK_ERRC(elias_gamma_decode(Bitstream()), Errc::kMalformedCode);
  Bitstream truncated;
  for (char c : std::string("0001")) truncated.push_back(c == '1');
  CHECK_ERRC(elias_gamma_decode(truncated), Errc::kMalformedCode);
}

TEST_CASE("binomials and logarithms") {
  for (unsigned n = 0; n <= 60; n += 3) {
    for (unsigned r = 0; r <= n; ++r) CHECK(binomial(n, r) == BigInt(oracle::binomial(n, r)));
  }
  CHECK(binomial(5, 7) == 0);
  CHECK(binomial(15, 7) == 6435);
  CHECK(ceil_log2(BigInt(1)) == 0);
  CHECK(ceil_log2(BigInt(2)) == 1);
  CHECK(ceil_log2(BigInt(3)) == 2);
  CHECK(ceil_log2(BigInt(1365)) == 11);
  CHECK(ceil_log2(BigInt(1) << 200) == 200);
  CHECK(ceil_log2((BigInt(1) << 200) + 1) == 201);
}

TEST_CASE("grammar size bits") {
  struct Row {
    std::uint32_t k;
    std::uint64_t r;
    unsigned total;
  };
  // grammar-size column of the comparison table
  const Row rows[] = {{1, 3, 3},     {2, 4, 18},    {2, 5, 19},     {2, 6, 20},     {3, 6, 32},     {5, 11, 69},
                      {5, 9, 61},    {6, 11, 78},   {6, 13, 87},    {18, 296, 1742}, {38, 321, 2883}, {39, 322, 2926},
                      {108, 244, 3396}, {3, 7, 34}, {6, 10, 73},    {4, 7, 45}};
  for (const auto& row : rows) {
    CAPTURE(row.k);
    CAPTURE(row.r);
    CHECK(grammar_size_bits(row.k, row.r).total == row.total);
  }
  const auto b = grammar_size_bits(2, 4);
  CHECK(b.gamma_bits == 3);
  CHECK(b.rulecount_bits == 4);
  CHECK(b.subset_bits == 11);
  const auto c = grammar_size_bits(3, 7);
  CHECK((c.gamma_bits == 3 && c.rulecount_bits == 6 && c.subset_bits == 25));
  const auto d = grammar_size_bits(5, 9);
  CHECK((d.gamma_bits == 5 && d.rulecount_bits == 8 && d.subset_bits == 48));
  CHECK_ERRC(grammar_size_bits(2, 0), Errc::kRuleCountOutOfRange);
  CHECK_ERRC(grammar_size_bits(2, 16), Errc::kRuleCountOutOfRange);
  for (std::uint32_t k = 1; k <= 20; ++k) CHECK(grammar_size_bits(k, 1).gamma_bits == 2 * static_cast<unsigned>(std::floor(std::log2(k))) + 1);
}

TEST_CASE("colex subset rank") {
  const std::vector<std::vector<std::uint64_t>> order = {{0, 1}, {0, 2}, {1, 2}, {0, 3}, {1, 3}, {2, 3}};
  for (std::size_t i = 0; i < order.size(); ++i) {
    CHECK(subset_rank(4, order[i]) == i);
    CHECK(subset_unrank(4, 2, i) == order[i]);
  }
  CHECK(subset_rank(7, {0, 1, 2, 3, 4, 5, 6}) == 0);
  for (unsigned u = 1; u <= 12; ++u) {
    for (unsigned r = 0; r <= u; ++r) {
      const auto all = oracle::colex_subsets(u, r);
      REQUIRE(BigInt(all.size()) == binomial(u, r));
      for (std::size_t i = 0; i < all.size(); ++i) {
        CHECK(subset_rank(u, all[i]) == i);
        CHECK(subset_unrank(u, r, i) == all[i]);
      }
    }
  }
  CHECK_ERRC(subset_unrank(4, 2, 6), Errc::kRankOutOfRange);
  CHECK_ERRC(subset_rank(4, {1, 1}), Errc::kRankOutOfRange);
  CHECK_ERRC(subset_rank(4, {2, 1}), Errc::kRankOutOfRange);
  CHECK_ERRC(subset_rank(4, {0, 4}), Errc::kRankOutOfRange);

  std::mt19937_64 rng(3);
  for (int t = 0; t < 200; ++t) {
    const std::uint64_t u = 1 + rng() % 400;
    const std::uint64_t r = rng() % (u + 1);
    const BigInt rank = uniform_below(binomial(u, r), rng);
    CHECK(subset_rank(u, subset_unrank(u, r, rank)) == rank);
  }
}

TEST_CASE("uniform_below") {
  std::mt19937_64 rng(5);
  std::vector<int> hist(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const BigInt v = uniform_below(7, rng);
    REQUIRE(v >= 0);
    REQUIRE(v < 7);
    ++hist[static_cast<int>(v)];
  }
  for (int h : hist) CHECK(h > 800);
  const BigInt big = binomial(990, 322);
  for (int i = 0; i < 20; ++i) CHECK(uniform_below(big, rng) < big);
  CHECK(uniform_below(1, rng) == 0);
}

TEST_CASE("grammar serialization") {
  const auto one = load_grammar(source_path("grammars/grammar_1nt.txt"));
  CHECK(serialize_grammar(one).size() == 3);
  CHECK(serialize_grammar(one).to_string() == "1" "11");
  CHECK(serialize_grammar(load_grammar(source_path("grammars/g_star_2_6.txt"))).size() == 20);
  for (const auto* name : {"grammar_1nt", "g_l", "g_star_2_5", "g_star_2_6", "g_star_3_6", "g_star_3_7", "g_dagger_6_10"}) {
    const auto g = load_grammar(source_path(std::string("grammars/") + name + ".txt"));
    const auto bits = serialize_grammar(g);
    CHECK(bits.size() == grammar_size_bits(g.nonterminals(), g.size()).total);
    CHECK(deserialize_grammar(bits) == g);
    // byte padding is ignored
    CHECK(deserialize_grammar(Bitstream(bits.bytes(), bits.bytes().size() * 8)) == g);
  }
  std::mt19937_64 rng(11);
  for (int t = 0; t < 300; ++t) {
    const auto k = static_cast<std::uint32_t>(1 + rng() % 6);
    const std::uint64_t r = 1 + rng() % universe_size(k);
    const auto g = random_grammar(k, r, rng);
    const auto bits = serialize_grammar(g);
    CHECK(bits.size() == grammar_size_bits(k, r).total);
    CHECK(deserialize_grammar(bits) == g);
  }
  CHECK_ERRC(deserialize_grammar(Bitstream()), Errc::kMalformedCode);
  Bitstream short_code;
  for (char c : std::string("010011")) short_code.push_back(c == '1');
  CHECK_ERRC(deserialize_grammar(short_code), Errc::kMalformedCode);
  Bitstream zero_rules;
  for (char c : std::string("0100000")) zero_rules.push_back(c == '1');
  CHECK_ERRC(deserialize_grammar(zero_rules), Errc::kMalformedCode);
}

TEST_CASE("bitstream") {
  Bitstream b;
  b.append(0b101, 3);
  b.append(0xAB, 8);
  CHECK(b.size() == 11);
  CHECK(b.to_string() == "10110101011");
  CHECK(b.to_hex() == "b560");
  BitReader in(b);
  CHECK(in.read(3) == 0b101);
  CHECK(in.read(8) == 0xAB);
  CHECK(in.exhausted());
  CHECK(in.read() == false);
  CHECK(in.overrun() == 1);
  CHECK(Bitstream(b.bytes(), 11) == b);
}
