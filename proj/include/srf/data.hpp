#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "srf/grammar.hpp"

namespace srf {

struct RnaRecord {
  std::string id;
  std::string sequence;   // over ACGU
  std::string structure;  // dot-bracket, same length

  std::size_t size() const { return sequence.size(); }
  bool operator==(const RnaRecord&) const = default;
};

enum class OnInvalid : std::uint8_t { kSkip, kFail };

struct LoadOptions {
  ExpansionMode pairing = ExpansionMode::kCanonical6;  // kCanonical6 or kAll16
  OnInvalid on_invalid = OnInvalid::kSkip;
};

struct SkippedRecord {
  std::string id;
  std::string reason;  // EmptyHairpin, NonACGU, NonCanonicalPair, Unbalanced, LengthMismatch, BadStructureChar
  std::string detail;
};

struct Dataset {
  std::vector<RnaRecord> records;
  std::string source;
  std::vector<SkippedRecord> skipped;

  std::size_t total_bases() const;
};

// Record format: ">id" line, sequence line(s), dot-bracket line(s); files
// without any '>' header are read as sequence/structure line pairs.
// Throws ParseError, or InvalidRecord when on_invalid is kFail.
Dataset parse_dataset(std::string_view text, const std::string& source, const LoadOptions& options = {});
Dataset load_dataset(const std::string& path, const LoadOptions& options = {});

std::string format_dataset(const std::vector<RnaRecord>& records);
void write_dataset(const std::vector<RnaRecord>& records, const std::string& path);
void write_filter_log(const Dataset& dataset, const std::string& path);

// Reason the record violates the invariants, if any.
std::optional<SkippedRecord> check_record(const RnaRecord& rec, ExpansionMode pairing);

// partner[i] = j for a pair (i, j), -1 for unpaired. Throws Unbalanced.
std::vector<int> pair_table(std::string_view structure);
std::string structure_from_pairs(const std::vector<int>& partner);

bool is_balanced(std::string_view structure);

// Number of valid structures (balanced, no "()") of each length 0..n.
std::vector<double> count_structures(std::size_t n);

// Structure drawn uniformly among valid structures of length n, with bases
// uniform over ACGU (unpaired) and over the six canonical pairs.
RnaRecord random_uniform_record(std::size_t n, std::mt19937_64& rng, std::string id = {});

double unit_uniform(std::mt19937_64& rng);

}  // namespace srf
