#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <random>

#include "srf/codec.hpp"
#include "srf/probmodel.hpp"
#include "test_util.hpp"

using namespace srf;

namespace {

ExpandedGrammar fixture(const std::string& name, ExpansionMode mode = ExpansionMode::kCanonical6) {
  return expand(load_grammar(source_path("grammars/" + name + ".txt")), mode);
}

}  // namespace

TEST_CASE("adaptive counts") {
  const auto g = fixture("grammar_1nt", ExpansionMode::kStructure);
  AdaptiveModel m(g);
  for (double p : m.adaptive_prob(0)) CHECK(p == doctest::Approx(1.0 / 3));
  m.adaptive_update(1);
  CHECK(m.probability(1) == doctest::Approx(0.5));
  for (int i = 0; i < 9; ++i) m.observe(1);
  CHECK(m.count(1) == 11);
  CHECK(m.lhs_total(0) == 13);
  CHECK(m.probability(1) == doctest::Approx(11.0 / 13));
  CHECK_ERRC(m.adaptive_update(3), Errc::kUnknownRule);
  m.reset();
  CHECK(m == AdaptiveModel(g));
}

TEST_CASE("distributions sum to one") {
  for (const auto* name : {"grammar_1nt", "g_l", "g_star_3_7", "g_dagger_6_10"}) {
    const auto g = fixture(name, ExpansionMode::kAll16);
    AdaptiveModel m(g);
    std::mt19937_64 rng(1);
    for (int i = 0; i < 500; ++i) m.observe(static_cast<std::uint32_t>(rng() % g.size()));
    for (std::uint32_t a = 0; a < g.nonterminals(); ++a) {
      if (g.rules_of(a).empty()) continue;
      const auto d = m.distribution(a);
      CHECK(std::abs(std::accumulate(d.begin(), d.end(), 0.0) - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("rule counts validation") {
  const auto g = fixture("grammar_1nt");
  CHECK_ERRC(StaticModel(g, std::vector<std::uint64_t>(10, 1)), Errc::kModelMismatch);
  auto counts = std::vector<std::uint64_t>(11, 1);
  counts[3] = 0;
  CHECK_ERRC(StaticModel(g, counts), Errc::kZeroProbabilityRule);
}

TEST_CASE("train_static") {
  const auto g = fixture("grammar_1nt");
  const auto m = train_static(g, {{"r", "A", "."}});
  REQUIRE(m.size() == 11);
  CHECK(m.count(1) == 2);  // A0 -> A
  for (std::uint32_t i = 0; i < 11; ++i) {
    if (i != 1) CHECK(m.count(i) == 1);
  }
  CHECK(m.probability(1) == doctest::Approx(2.0 / 12));

  const auto empty = train_static(g, {});
  for (std::uint32_t i = 0; i < 11; ++i) CHECK(empty.count(i) == 1);

  CHECK_ERRC(train_static(g, {{"bad", "GC", "()"}}), Errc::kUnparseableRecord);

  // order of the training records does not matter
  auto corpus = load_dataset(source_path("data/corpus.fa")).records;
  const auto g37 = fixture("g_star_3_7");
  const auto a = train_static(g37, corpus);
  std::mt19937_64 rng(2);
  std::shuffle(corpus.begin(), corpus.end(), rng);
  CHECK(train_static(g37, corpus).counts() == a.counts());
  std::uint64_t total = 0;
  for (auto c : a.counts()) total += c;
  CHECK(total > a.size());
}

TEST_CASE("static model files") {
  const auto g = fixture("g_l");
  const auto m = train_static(g, load_dataset(source_path("data/corpus.fa")).records);
  const auto path = (std::filesystem::temp_directory_path() / "srf_test_counts.txt").string();
  save_static_model(m, g, "g_l", path);
  CHECK(load_static_model(path, g).counts() == m.counts());
  CHECK_ERRC(load_static_model(path, fixture("g_l", ExpansionMode::kAll16)), Errc::kModelMismatch);
  CHECK_ERRC(load_static_model(path, fixture("g_star_2_5")), Errc::kModelMismatch);
  std::remove(path.c_str());
  CHECK_ERRC(load_static_model(path, g), Errc::kIo);
}
