#include <algorithm>
#include <cmath>
#include <random>

#include "srf/arith.hpp"
#include "srf/codec.hpp"
#include "test_util.hpp"

using namespace srf;

namespace {

SrfGrammar base(const std::string& name) { return load_grammar(source_path("grammars/" + name + ".txt")); }
ExpandedGrammar fixture(const std::string& name, ExpansionMode mode = ExpansionMode::kCanonical6) {
  return expand(base(name), mode);
}

const std::vector<RnaRecord>& corpus() {
  static const auto records = load_dataset(source_path("data/corpus.fa")).records;
  return records;
}

}  // namespace

TEST_CASE("arithmetic coder on random sources") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t alphabet = 1 + rng() % 322;
    std::vector<std::uint64_t> counts(alphabet);
    std::uint64_t total = 0;
    for (auto& c : counts) total += c = 1 + rng() % (trial % 2 ? 1000 : 3);
    const auto freq = coding_frequencies(counts, total);
    std::vector<std::uint32_t> cum(alphabet + 1, 0);
    for (std::size_t s = 0; s < alphabet; ++s) cum[s + 1] = cum[s] + freq[s];
    REQUIRE(cum.back() < (1u << 16));
    std::vector<std::size_t> msg(1 + rng() % 40);
    for (auto& s : msg) s = rng() % alphabet;

    ArithmeticEncoder enc;
    for (std::size_t s : msg) enc.encode(cum[s], cum[s + 1], cum.back());
    const Bitstream bits = enc.finish();

    ArithmeticDecoder dec(bits);
    for (std::size_t s : msg) {
      const std::uint32_t t = dec.target(cum.back());
      const auto got = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), t) - cum.begin() - 1);
      REQUIRE(got == s);
      dec.consume(cum[got], cum[got + 1], cum.back());
    }
    CHECK(dec.overrun() == 30);
  }
}

TEST_CASE("coding frequencies") {
  const std::vector<std::uint64_t> c{1, 1, 2};
  CHECK(coding_frequencies(c, 4) == std::vector<std::uint32_t>{4096, 4096, 8192});
  const std::vector<std::uint64_t> skew{1, 1000000};
  CHECK(coding_frequencies(skew, 1000001)[0] == 1);
  CHECK_ERRC(coding_frequencies(std::vector<std::uint64_t>{0, 1}, 1), Errc::kZeroProbabilityRule);
}

TEST_CASE("single-rule derivation under the uniform prior") {
  const auto g = fixture("grammar_1nt");
  AdaptiveModel m(g);
  const auto c = compress_record({"r", "A", "."}, g, m);
  CHECK(c.rules == 1);
  CHECK(c.model_bits == doctest::Approx(std::log2(11.0)).epsilon(1e-12));
  CHECK(std::abs(c.ideal_bits - std::log2(11.0)) < 1e-3);
  CHECK(c.bits.size() >= 4);
  CHECK(static_cast<double>(c.bits.size()) <= c.ideal_bits + 2);
  AdaptiveModel fresh(g);
  CHECK(decompress_record(c.bits, g, fresh, "r") == RnaRecord{"r", "A", "."});
}

TEST_CASE("certain events cost only the flush") {
  const ExpandedGrammar g(validate_srf(1, {Rule::unpaired(0)}), ExpansionMode::kStructure);
  AdaptiveModel m(g);
  const auto e = encode_derivation(g, {{0}}, m);
  CHECK(e.ideal_bits == 0.0);
  CHECK(e.bits.size() <= 2);
  AdaptiveModel d(g);
  CHECK(decode_derivation(g, e.bits, d).rule_ids == std::vector<std::uint32_t>{0});
}

TEST_CASE("dyadic static model") {
  const auto g = fixture("grammar_1nt", ExpansionMode::kStructure);
  const StaticModel m(g, {1, 2, 1});  // A A: 1/4, u: 1/2, ( A ): 1/4
  const Derivation d{{0, 1, 0, 1, 1}};
  const auto e = encode_derivation(g, d, m);
  CHECK(e.ideal_bits == 7.0);
  CHECK(e.model_bits == 7.0);
  CHECK(e.bits.size() <= 9);
  CHECK(decode_derivation(g, e.bits, m) == d);
}

TEST_CASE("62-nt hairpin record roundtrip") {
  const auto g = fixture("grammar_1nt");
  const RnaRecord rec62{"hairpin62", kHairpin62Sequence, kHairpin62Structure};
  const auto uniform = uniform_probabilities(g);
  const auto parsed = viterbi_parse(g, joint_word(rec62.sequence, rec62.structure), uniform, MatchMode::kJoint);
  REQUIRE(parsed);
  AdaptiveModel enc_model(g);
  const auto e = encode_derivation(g, parsed->derivation, enc_model);
  AdaptiveModel dec_model(g);
  CHECK(decode_derivation(g, e.bits, dec_model) == parsed->derivation);
  CHECK(dec_model == enc_model);
}

TEST_CASE("corrupt streams") {
  const auto g = fixture("g_l");
  const auto& rec = corpus()[0];
  AdaptiveModel m(g);
  const auto c = compress_record(rec, g, m);
  for (std::size_t keep : {std::size_t{0}, c.bits.size() / 2, c.bits.size() - 1}) {
    Bitstream cut;
    for (std::size_t i = 0; i < keep; ++i) cut.push_back(c.bits[i]);
    AdaptiveModel d(g);
    CHECK_THROWS_AS(decompress_record(cut, g, d), Error);
  }
  Bitstream longer = c.bits;
  longer.append(0b1011, 4);
  AdaptiveModel d(g);
  CHECK_ERRC(decompress_record(longer, g, d), Errc::kCorruptStream);

  AdaptiveModel other(fixture("grammar_1nt"));
  CHECK_ERRC(encode_derivation(g, {{0}}, other), Errc::kModelMismatch);
  AdaptiveModel mm(g);
  CHECK_ERRC(encode_derivation(g, {{1}}, mm), Errc::kMalformedDerivation);
}

TEST_CASE("unparseable records") {
  const auto g = fixture("grammar_1nt");
  AdaptiveModel m(g);
  CHECK_ERRC(compress_record({"nc", "AAGAA", "(...)"}, g, m), Errc::kUnparseableRecord);
  CHECK_ERRC(compress_record({"eh", "GC", "()"}, g, m), Errc::kUnparseableRecord);
  const auto all16 = fixture("grammar_1nt", ExpansionMode::kAll16);
  AdaptiveModel m16(all16);
  CHECK(compress_record({"nc", "AAGAA", "(...)"}, all16, m16).rules > 0);
}

TEST_CASE("record roundtrips and tightness") {
  for (const auto* name : {"grammar_1nt", "g_l", "g_star_2_5", "g_star_2_6", "g_star_3_7", "g_dagger_6_10"}) {
    const auto g = fixture(name);
    const auto trained = train_static(g, corpus());
    AdaptiveModel shared(g);
    for (const auto& rec : corpus()) {
      AdaptiveModel fresh(g);
      const auto a = compress_record(rec, g, fresh);
      AdaptiveModel fresh_dec(g);
      CHECK(decompress_record(a.bits, g, fresh_dec, rec.id) == rec);
      CHECK(static_cast<double>(a.bits.size()) <= a.ideal_bits + 4);
      CHECK(static_cast<double>(a.bits.size()) + 1e-9 >= a.ideal_bits);

      const auto s = compress_record(rec, g, trained);
      CHECK(decompress_record(s.bits, g, trained, rec.id) == rec);
      CHECK(static_cast<double>(s.bits.size()) <= s.ideal_bits + 4);

      compress_record(rec, g, shared);
    }
  }
}

TEST_CASE("evaluate") {
  const auto g = fixture("g_star_2_6");
  const auto one = evaluate({{"r", "A", "."}}, fixture("grammar_1nt"), {});
  CHECK(one.total_bases == 1);
  CHECK(one.per_record.size() == 1);

  EvaluateOptions opts;
  const auto a = evaluate(corpus(), g, opts);
  const auto b = evaluate(corpus(), g, opts);
  CHECK(a.total_bits == b.total_bits);
  CHECK(a.bits_per_base == static_cast<double>(a.total_bits) / static_cast<double>(a.total_bases));
  std::size_t bases = 0;
  for (const auto& r : corpus()) bases += r.size();
  CHECK(a.total_bases == bases);

  opts.threads = 4;
  const auto threaded = evaluate(corpus(), g, opts);
  CHECK(threaded.total_bits == a.total_bits);
  for (std::size_t i = 0; i < a.per_record.size(); ++i) CHECK(threaded.per_record[i].bits == a.per_record[i].bits);

  auto shuffled = corpus();
  std::mt19937_64 rng(9);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  CHECK(evaluate(shuffled, g, {}).total_bits == a.total_bits);

  EvaluateOptions st;
  st.kind = ModelKind::kStatic;
  const auto s1 = evaluate(corpus(), g, st);
  CHECK(evaluate(shuffled, g, st).total_bits == s1.total_bits);
  st.threads = 3;
  CHECK(evaluate(corpus(), g, st).total_bits == s1.total_bits);

  EvaluateOptions ds;
  ds.scope = AdaptiveScope::kDataset;
  ds.threads = 4;  // ignored: one model spans the dataset
  const auto cross = evaluate(corpus(), g, ds);
  CHECK(cross.total_bits < a.total_bits);

  std::vector<RnaRecord> with_bad = {corpus()[0], {"bad", "AAGAA", "(...)"}, corpus()[1]};
  CHECK_ERRC(evaluate(with_bad, g, {}), Errc::kUnparseableRecord);
  EvaluateOptions skip;
  skip.skip_unparseable = true;
  const auto skipped = evaluate(with_bad, g, skip);
  CHECK(skipped.skipped == std::vector<std::string>{"bad"});
  CHECK(skipped.per_record.size() == 2);
  skip.kind = ModelKind::kStatic;
  CHECK(evaluate(with_bad, g, skip).per_record.size() == 2);
}

TEST_CASE("archives") {
  const auto g = fixture("g_star_3_7");
  const auto trained = train_static(g, corpus());
  for (auto kind : {ModelKind::kAdaptive, ModelKind::kStatic}) {
    for (auto scope : {AdaptiveScope::kRecord, AdaptiveScope::kDataset}) {
      const auto bytes = compress_archive(corpus(), g, kind, scope, &trained);
      const auto h = read_archive_header(bytes);
      CHECK(h.kind == kind);
      CHECK(h.records == corpus().size());
      CHECK(h.mode == ExpansionMode::kCanonical6);
      CHECK(decompress_archive(bytes, g, &trained) == corpus());
      CHECK(compress_archive(corpus(), g, kind, scope, &trained) == bytes);

      auto trailing = bytes;
      trailing.push_back(0);
      CHECK_ERRC(decompress_archive(trailing, g, &trained), Errc::kCorruptStream);
      auto truncated = bytes;
      truncated.resize(bytes.size() / 2);
      CHECK_THROWS_AS(decompress_archive(truncated, g, &trained), Error);
    }
  }
  auto bytes = compress_archive(corpus(), g, ModelKind::kStatic, AdaptiveScope::kRecord, &trained);
  CHECK_ERRC(decompress_archive(bytes, g, nullptr), Errc::kInvalidConfig);
  CHECK_ERRC(decompress_archive(bytes, fixture("g_star_3_7", ExpansionMode::kAll16), &trained), Errc::kModelMismatch);
  bytes[0] = 'X';
  CHECK_ERRC(read_archive_header(bytes), Errc::kCorruptStream);

  std::vector<std::uint8_t> buf;
  for (std::uint64_t v : {0ull, 1ull, 127ull, 128ull, 300ull, ~0ull}) put_varint(buf, v);
  std::size_t pos = 0;
  for (std::uint64_t v : {0ull, 1ull, 127ull, 128ull, 300ull, ~0ull}) CHECK(get_varint(buf, pos) == v);
  CHECK(pos == buf.size());
  CHECK_ERRC(get_varint(buf, pos), Errc::kCorruptStream);
}

TEST_CASE("model names") {
  CHECK(model_kind_from_string("static") == ModelKind::kStatic);
  CHECK(adaptive_scope_from_string("dataset") == AdaptiveScope::kDataset);
  CHECK_ERRC(model_kind_from_string("bogus"), Errc::kInvalidConfig);
}
