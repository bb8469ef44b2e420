#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "srf/bits.hpp"
#include "srf/data.hpp"
#include "srf/grammar.hpp"
#include "srf/parser.hpp"
#include "srf/probmodel.hpp"

namespace srf {

enum class ModelKind : std::uint8_t { kAdaptive, kStatic };
enum class AdaptiveScope : std::uint8_t { kRecord, kDataset };

std::string_view to_string(ModelKind kind);
std::string_view to_string(AdaptiveScope scope);
ModelKind model_kind_from_string(std::string_view s);
AdaptiveScope adaptive_scope_from_string(std::string_view s);

struct EncodedDerivation {
  Bitstream bits;
  double ideal_bits = 0.0;  // sum of -log2 q(r) under the coding frequencies
  double model_bits = 0.0;  // sum of -log2 p(r) under the exact model counts
};

// Arithmetic-codes each rule against the distribution of the current
// leftmost nonterminal. Adaptive models are updated after every rule.
// Throws MalformedDerivation or ZeroProbabilityRule.
EncodedDerivation encode_derivation(const ExpandedGrammar& g, const Derivation& d, AdaptiveModel& model);
EncodedDerivation encode_derivation(const ExpandedGrammar& g, const Derivation& d, const StaticModel& model);

// Decodes until no nonterminal is left. Throws CorruptStream.
Derivation decode_derivation(const ExpandedGrammar& g, const Bitstream& bits, AdaptiveModel& model);
Derivation decode_derivation(const ExpandedGrammar& g, const Bitstream& bits, const StaticModel& model);

struct CompressedRecord {
  Bitstream bits;
  double ideal_bits = 0.0;
  double model_bits = 0.0;
  std::size_t rules = 0;
};

// Static: Viterbi under the model's probabilities; adaptive: Viterbi under
// uniform probabilities. Throws UnparseableRecord.
CompressedRecord compress_record(const RnaRecord& rec, const ExpandedGrammar& g, AdaptiveModel& model);
CompressedRecord compress_record(const RnaRecord& rec, const ExpandedGrammar& g, const StaticModel& model);

RnaRecord decompress_record(const Bitstream& bits, const ExpandedGrammar& g, AdaptiveModel& model, std::string id = {});
RnaRecord decompress_record(const Bitstream& bits, const ExpandedGrammar& g, const StaticModel& model,
                            std::string id = {});

struct RecordStats {
  std::string id;
  std::size_t bits = 0;
  std::size_t bases = 0;
  double ideal_bits = 0.0;
};

struct CompressionReport {
  std::size_t total_bits = 0;
  std::size_t total_bases = 0;
  double bits_per_base = 0.0;
  double ideal_bits = 0.0;
  std::vector<RecordStats> per_record;
  std::vector<std::string> skipped;  // unparseable ids (skip mode only)
};

struct EvaluateOptions {
  ModelKind kind = ModelKind::kAdaptive;
  AdaptiveScope scope = AdaptiveScope::kRecord;
  // Static kind: counts to code with. When absent they are trained on the
  // evaluated records themselves.
  const StaticModel* static_model = nullptr;
  bool skip_unparseable = false;
  std::size_t threads = 1;
};

// Aggregates actual stream bits over the dataset. Throws UnparseableRecord
// unless skipping.
CompressionReport evaluate(const std::vector<RnaRecord>& dataset, const ExpandedGrammar& g,
                           const EvaluateOptions& options);

// ---------------------------------------------------------------------------
// Archive: "SRF1", flags byte, varint record count, then per record a varint
// id length, the id, a varint payload bit count and the byte-aligned payload.

struct ArchiveHeader {
  ModelKind kind = ModelKind::kAdaptive;
  AdaptiveScope scope = AdaptiveScope::kRecord;
  ExpansionMode mode = ExpansionMode::kCanonical6;
  std::uint64_t records = 0;
};

std::vector<std::uint8_t> compress_archive(const std::vector<RnaRecord>& records, const ExpandedGrammar& g,
                                           ModelKind kind, AdaptiveScope scope, const StaticModel* static_model);
ArchiveHeader read_archive_header(const std::vector<std::uint8_t>& bytes);
std::vector<RnaRecord> decompress_archive(const std::vector<std::uint8_t>& bytes, const ExpandedGrammar& g,
                                          const StaticModel* static_model);

void put_varint(std::vector<std::uint8_t>& out, std::uint64_t v);
std::uint64_t get_varint(const std::vector<std::uint8_t>& in, std::size_t& pos);

}  // namespace srf
