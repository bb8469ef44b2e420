#include "srf/codec.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <optional>

#include "srf/arith.hpp"
#include "srf/error.hpp"
#include "srf/parallel.hpp"

namespace srf {

std::string_view to_string(ModelKind kind) { return kind == ModelKind::kAdaptive ? "adaptive" : "static"; }
std::string_view to_string(AdaptiveScope scope) { return scope == AdaptiveScope::kRecord ? "record" : "dataset"; }

ModelKind model_kind_from_string(std::string_view s) {
  if (s == "adaptive") return ModelKind::kAdaptive;
  if (s == "static") return ModelKind::kStatic;
  fail(Errc::kInvalidConfig, "unknown model kind '" + std::string(s) + "'");
}

AdaptiveScope adaptive_scope_from_string(std::string_view s) {
  if (s == "record") return AdaptiveScope::kRecord;
  if (s == "dataset") return AdaptiveScope::kDataset;
  fail(Errc::kInvalidConfig, "unknown adaptive scope '" + std::string(s) + "'");
}

namespace {

// Upper bound on decoded rules, against corrupt streams that would loop on
// probability-one rules.
constexpr std::size_t kMaxDecodedRules = std::size_t{1} << 26;

// The decoder window is 32 bits and the encoder flushes 2, so a complete
// stream is over-read by exactly 30 bits once every rule is decoded.
constexpr std::size_t kFinalOverrun = 30;

struct Slot {
  std::uint32_t cum_low, cum_high, total;
};

template <typename Model>
std::vector<std::uint32_t> lhs_frequencies(const Model& model, NonterminalId lhs) {
  const auto& ids = model.rules_of(lhs);
  std::vector<std::uint64_t> counts;
  counts.reserve(ids.size());
  for (std::uint32_t id : ids) counts.push_back(model.count(id));
  return coding_frequencies(counts, model.lhs_total(lhs));
}

void push_children(const ExpandedRule& r, std::vector<NonterminalId>& stack) {
  switch (r.kind) {
    case RuleKind::kUnpaired: break;
    case RuleKind::kBond:
    case RuleKind::kChain: stack.push_back(r.first); break;
    case RuleKind::kPairSplit:
      stack.push_back(r.second);
      stack.push_back(r.first);
      break;
  }
}

template <typename Model>
EncodedDerivation encode_impl(const ExpandedGrammar& g, const Derivation& d, Model& model) {
  if (model.size() != g.size()) fail(Errc::kModelMismatch, "model does not belong to this grammar");
  ArithmeticEncoder enc;
  EncodedDerivation out;
  std::vector<NonterminalId> stack{g.start()};
  for (std::size_t step = 0; step < d.rule_ids.size(); ++step) {
    const std::uint32_t id = d.rule_ids[step];
    if (stack.empty()) fail(Errc::kMalformedDerivation, "rules left after the word became all terminals");
    if (id >= g.size()) fail(Errc::kMalformedDerivation, "rule id " + std::to_string(id) + " out of range");
    const NonterminalId lhs = stack.back();
    stack.pop_back();
    const ExpandedRule& r = g.rules()[id];
    if (r.lhs != lhs) {
      fail(Errc::kMalformedDerivation, "step " + std::to_string(step) + ": rule lhs does not match leftmost nonterminal");
    }
    const auto& ids = model.rules_of(lhs);
    const auto freq = lhs_frequencies(model, lhs);
    std::uint32_t cum = 0, total = 0, low = 0, mine = 0;
    for (std::size_t s = 0; s < ids.size(); ++s) {
      if (ids[s] == id) {
        low = cum;
        mine = freq[s];
      }
      cum += freq[s];
    }
    total = cum;
    if (mine == 0) fail(Errc::kZeroProbabilityRule, "rule " + std::to_string(id));
    enc.encode(low, low + mine, total);
    out.ideal_bits -= std::log2(static_cast<double>(mine) / static_cast<double>(total));
    out.model_bits -= std::log2(model.probability(id));
    model.observe(id);
    push_children(r, stack);
  }
  if (!stack.empty()) fail(Errc::kMalformedDerivation, "derivation ends with nonterminals left");
  out.bits = enc.finish();
  return out;
}

template <typename Model>
Derivation decode_impl(const ExpandedGrammar& g, const Bitstream& bits, Model& model) {
  if (model.size() != g.size()) fail(Errc::kModelMismatch, "model does not belong to this grammar");
  ArithmeticDecoder dec(bits);
  Derivation d;
  std::vector<NonterminalId> stack{g.start()};
  while (!stack.empty()) {
    const NonterminalId lhs = stack.back();
    stack.pop_back();
    const auto& ids = model.rules_of(lhs);
    if (ids.empty()) fail(Errc::kCorruptStream, "decoded into A" + std::to_string(lhs) + " which has no rules");
    const auto freq = lhs_frequencies(model, lhs);
    std::uint32_t total = 0;
    for (std::uint32_t f : freq) total += f;
    const std::uint32_t target = dec.target(total);
    if (target >= total) fail(Errc::kCorruptStream, "decoder target outside the distribution");
    std::size_t s = 0;
    std::uint32_t cum = 0;
    while (cum + freq[s] <= target) cum += freq[s++];
    dec.consume(cum, cum + freq[s], total);
    const std::uint32_t id = ids[s];
    const ExpandedRule& r = g.rules()[id];
    if (r.lhs != lhs) fail(Errc::kCorruptStream, "decoded rule does not match leftmost nonterminal");
    d.rule_ids.push_back(id);
    model.observe(id);
    push_children(r, stack);
    if (dec.overrun() > kFinalOverrun) fail(Errc::kCorruptStream, "stream ended before the derivation was complete");
    if (d.rule_ids.size() > kMaxDecodedRules) fail(Errc::kCorruptStream, "derivation exceeds the decoder limit");
  }
  if (dec.overrun() != kFinalOverrun) fail(Errc::kCorruptStream, "stream length does not match the decoded derivation");
  return d;
}

template <typename Model>
CompressedRecord compress_with(ViterbiParser& parser, const RnaRecord& rec, const ExpandedGrammar& g, Model& model) {
  const Word w = joint_word(rec.sequence, rec.structure);
  if (w.size() != rec.structure.size() || rec.sequence.size() != rec.structure.size()) {
    fail(Errc::kUnparseableRecord, "record '" + rec.id + "': length mismatch");
  }
  auto parsed = parser.parse(w);
  if (!parsed) fail(Errc::kUnparseableRecord, "record '" + rec.id + "'");
  EncodedDerivation enc = encode_impl(g, parsed->derivation, model);
  return {std::move(enc.bits), enc.ideal_bits, enc.model_bits, parsed->derivation.rule_ids.size()};
}

RnaRecord record_from_word(const Word& w, std::string id) {
  return {std::move(id), word_sequence(w), word_structure(w)};
}

}  // namespace

EncodedDerivation encode_derivation(const ExpandedGrammar& g, const Derivation& d, AdaptiveModel& model) {
  return encode_impl(g, d, model);
}

EncodedDerivation encode_derivation(const ExpandedGrammar& g, const Derivation& d, const StaticModel& model) {
  StaticModel copy = model;
  return encode_impl(g, d, copy);
}

Derivation decode_derivation(const ExpandedGrammar& g, const Bitstream& bits, AdaptiveModel& model) {
  return decode_impl(g, bits, model);
}

Derivation decode_derivation(const ExpandedGrammar& g, const Bitstream& bits, const StaticModel& model) {
  StaticModel copy = model;
  return decode_impl(g, bits, copy);
}

CompressedRecord compress_record(const RnaRecord& rec, const ExpandedGrammar& g, AdaptiveModel& model) {
  const auto uniform = uniform_probabilities(g);
  ViterbiParser parser(g, uniform, MatchMode::kJoint);
  return compress_with(parser, rec, g, model);
}

CompressedRecord compress_record(const RnaRecord& rec, const ExpandedGrammar& g, const StaticModel& model) {
  const auto probs = model.probabilities();
  ViterbiParser parser(g, probs, MatchMode::kJoint);
  StaticModel copy = model;
  return compress_with(parser, rec, g, copy);
}

RnaRecord decompress_record(const Bitstream& bits, const ExpandedGrammar& g, AdaptiveModel& model, std::string id) {
  return record_from_word(replay(g, decode_impl(g, bits, model)), std::move(id));
}

RnaRecord decompress_record(const Bitstream& bits, const ExpandedGrammar& g, const StaticModel& model,
                            std::string id) {
  return record_from_word(replay(g, decode_derivation(g, bits, model)), std::move(id));
}

CompressionReport evaluate(const std::vector<RnaRecord>& dataset, const ExpandedGrammar& g,
                           const EvaluateOptions& options) {
  const std::size_t n = dataset.size();
  std::vector<std::optional<CompressedRecord>> coded(n);
  auto code_range = [&](auto model, std::span<const double> probs, std::size_t lo, std::size_t hi, bool reset_each) {
    ViterbiParser parser(g, probs, MatchMode::kJoint);
    for (std::size_t i = lo; i < hi; ++i) {
      if constexpr (decltype(model)::kAdaptive) {
        if (reset_each) model.reset();
      }
      try {
        coded[i] = compress_with(parser, dataset[i], g, model);
      } catch (const Error& e) {
        if (e.code() != Errc::kUnparseableRecord || !options.skip_unparseable) throw;
      }
    }
  };
  // Records are independent unless one adaptive model spans the dataset, so
  // they can be split into contiguous chunks without changing any output.
  auto in_chunks = [&](bool independent, const auto& body) {
    const std::size_t chunks = independent ? std::max<std::size_t>(1, std::min(options.threads, n)) : 1;
    std::vector<std::exception_ptr> errors(chunks);
    parallel_for(chunks, chunks, [&](std::size_t c) {
      try {
        body(n * c / chunks, n * (c + 1) / chunks);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  };

  if (options.kind == ModelKind::kAdaptive) {
    const auto uniform = uniform_probabilities(g);
    const bool per_record = options.scope == AdaptiveScope::kRecord;
    in_chunks(per_record, [&](std::size_t lo, std::size_t hi) { code_range(AdaptiveModel(g), uniform, lo, hi, per_record); });
  } else {
    std::optional<StaticModel> trained;
    if (!options.static_model) {
      if (options.skip_unparseable) {
        std::vector<RnaRecord> usable;
        const auto uniform = uniform_probabilities(g);
        ViterbiParser probe(g, uniform, MatchMode::kJoint);
        for (const auto& rec : dataset) {
          if (probe.accepts(joint_word(rec.sequence, rec.structure))) usable.push_back(rec);
        }
        trained = train_static(g, usable);
      } else {
        trained = train_static(g, dataset);
      }
    }
    const StaticModel& model = options.static_model ? *options.static_model : *trained;
    const auto probs = model.probabilities();
    in_chunks(true, [&](std::size_t lo, std::size_t hi) { code_range(model, probs, lo, hi, false); });
  }

  CompressionReport report;
  for (std::size_t i = 0; i < n; ++i) {
    const RnaRecord& rec = dataset[i];
    if (!coded[i]) {
      report.skipped.push_back(rec.id);
      continue;
    }
    report.per_record.push_back({rec.id, coded[i]->bits.size(), rec.size(), coded[i]->ideal_bits});
    report.total_bits += coded[i]->bits.size();
    report.total_bases += rec.size();
    report.ideal_bits += coded[i]->ideal_bits;
  }
  report.bits_per_base =
      report.total_bases == 0 ? 0.0 : static_cast<double>(report.total_bits) / static_cast<double>(report.total_bases);
  return report;
}

// ---------------------------------------------------------------------------
// Archive

void put_varint(std::vector<std::uint8_t>& out, std::uint64_t v) {
  while (v >= 0x80) {
    out.push_back(static_cast<std::uint8_t>(v | 0x80));
    v >>= 7;
  }
  out.push_back(static_cast<std::uint8_t>(v));
}

std::uint64_t get_varint(const std::vector<std::uint8_t>& in, std::size_t& pos) {
  std::uint64_t v = 0;
  for (unsigned shift = 0; shift < 64; shift += 7) {
    if (pos >= in.size()) fail(Errc::kCorruptStream, "truncated varint");
    const std::uint8_t b = in[pos++];
    v |= static_cast<std::uint64_t>(b & 0x7F) << shift;
    if ((b & 0x80) == 0) return v;
  }
  fail(Errc::kCorruptStream, "varint too long");
}

namespace {

constexpr std::uint8_t kMagic[4] = {'S', 'R', 'F', '1'};

std::uint8_t header_flags(ModelKind kind, AdaptiveScope scope, ExpansionMode mode) {
  std::uint8_t f = 0;
  if (kind == ModelKind::kStatic) f |= 0x01;
  if (scope == AdaptiveScope::kDataset) f |= 0x02;
  if (mode == ExpansionMode::kAll16) f |= 0x04;
  return f;
}

}  // namespace

std::vector<std::uint8_t> compress_archive(const std::vector<RnaRecord>& records, const ExpandedGrammar& g,
                                           ModelKind kind, AdaptiveScope scope, const StaticModel* static_model) {
  if (g.mode() == ExpansionMode::kStructure) fail(Errc::kInvalidConfig, "archives need an RNA (expanded) grammar");
  if (kind == ModelKind::kStatic && !static_model) fail(Errc::kInvalidConfig, "static model required");
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  out.push_back(header_flags(kind, scope, g.mode()));
  put_varint(out, records.size());
  auto put_record = [&](const RnaRecord& rec, const Bitstream& bits) {
    put_varint(out, rec.id.size());
    out.insert(out.end(), rec.id.begin(), rec.id.end());
    put_varint(out, bits.size());
    out.insert(out.end(), bits.bytes().begin(), bits.bytes().end());
  };
  if (kind == ModelKind::kAdaptive) {
    AdaptiveModel model(g);
    const auto uniform = uniform_probabilities(g);
    ViterbiParser parser(g, uniform, MatchMode::kJoint);
    for (const auto& rec : records) {
      if (scope == AdaptiveScope::kRecord) model.reset();
      put_record(rec, compress_with(parser, rec, g, model).bits);
    }
  } else {
    StaticModel model = *static_model;
    const auto probs = model.probabilities();
    ViterbiParser parser(g, probs, MatchMode::kJoint);
    for (const auto& rec : records) put_record(rec, compress_with(parser, rec, g, model).bits);
  }
  return out;
}

ArchiveHeader read_archive_header(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 5 || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
    fail(Errc::kCorruptStream, "missing SRF1 magic");
  }
  const std::uint8_t f = bytes[4];
  if (f & ~0x07u) fail(Errc::kCorruptStream, "unknown header flags");
  ArchiveHeader h;
  h.kind = (f & 0x01) ? ModelKind::kStatic : ModelKind::kAdaptive;
  h.scope = (f & 0x02) ? AdaptiveScope::kDataset : AdaptiveScope::kRecord;
  h.mode = (f & 0x04) ? ExpansionMode::kAll16 : ExpansionMode::kCanonical6;
  std::size_t pos = 5;
  h.records = get_varint(bytes, pos);
  return h;
}

std::vector<RnaRecord> decompress_archive(const std::vector<std::uint8_t>& bytes, const ExpandedGrammar& g,
                                          const StaticModel* static_model) {
  const ArchiveHeader h = read_archive_header(bytes);
  if (h.mode != g.mode()) fail(Errc::kModelMismatch, "archive expansion mode differs from the grammar's");
  if (h.kind == ModelKind::kStatic && !static_model) fail(Errc::kInvalidConfig, "static model required");
  std::size_t pos = 5;
  get_varint(bytes, pos);
  std::optional<AdaptiveModel> adaptive;
  if (h.kind == ModelKind::kAdaptive) adaptive.emplace(g);
  std::vector<RnaRecord> out;
  for (std::uint64_t n = 0; n < h.records; ++n) {
    const std::uint64_t id_len = get_varint(bytes, pos);
    if (id_len > bytes.size() - pos) fail(Errc::kCorruptStream, "truncated record id");
    std::string id(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                   bytes.begin() + static_cast<std::ptrdiff_t>(pos + id_len));
    pos += id_len;
    const std::uint64_t bit_count = get_varint(bytes, pos);
    const std::uint64_t byte_count = (bit_count + 7) / 8;
    if (byte_count > bytes.size() - pos) fail(Errc::kCorruptStream, "truncated record payload");
    Bitstream bits(std::vector<std::uint8_t>(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                                             bytes.begin() + static_cast<std::ptrdiff_t>(pos + byte_count)),
                   bit_count);
    pos += byte_count;
    if (adaptive) {
      if (h.scope == AdaptiveScope::kRecord) adaptive->reset();
      out.push_back(decompress_record(bits, g, *adaptive, std::move(id)));
    } else {
      out.push_back(decompress_record(bits, g, *static_model, std::move(id)));
    }
  }
  if (pos != bytes.size()) fail(Errc::kCorruptStream, "trailing bytes after the last record");
  return out;
}

}  // namespace srf
