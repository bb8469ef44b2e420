#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "srf/grammar.hpp"

namespace srf {

// Rule ids into the grammar's expanded rule list, in leftmost order.
struct Derivation {
  std::vector<std::uint32_t> rule_ids;

  bool operator==(const Derivation&) const = default;
};

struct ViterbiResult {
  Derivation derivation;
  double log2_prob = 0.0;
};

// Which component of a terminal the parser compares.
enum class MatchMode : std::uint8_t {
  kStructure,  // dot-bracket symbol only
  kJoint,      // base and dot-bracket symbol
  kSequence,   // base only (prediction)
};

// Uniform distribution per left-hand side.
std::vector<double> uniform_probabilities(const ExpandedGrammar& g);

// Throws ProbabilityInvalid unless every lhs distribution sums to 1 (1e-9).
void check_probabilities(const ExpandedGrammar& g, std::span<const double> probs);

// Viterbi CYK over SRF rules. Cells V_A(w[i..j)) are filled by increasing
// length, then by ascending nonterminal, so chain rules A -> B (B < A) read
// finalized cells. A parser owns its chart and may be reused for many words.
class ViterbiParser {
 public:
  ViterbiParser(const ExpandedGrammar& g, std::span<const double> probs, MatchMode mode);

  std::optional<ViterbiResult> parse(std::span<const Terminal> word);
  bool accepts(std::span<const Terminal> word);

  const ExpandedGrammar& grammar() const { return *g_; }

 private:
  struct Choice {
    std::int64_t rule = -1;
    std::uint32_t split = 0;
  };

  template <typename Semiring>
  void fill(std::span<const Terminal> word);
  template <typename Semiring>
  Choice relax(NonterminalId a, std::uint32_t i, std::uint32_t j, std::span<const Terminal> word,
               typename Semiring::value_type& best) const;

  bool unpaired_matches(const ExpandedRule& r, const Terminal& t) const;
  bool bond_matches(const ExpandedRule& r, const Terminal& open, const Terminal& close) const;

  std::size_t fwd(NonterminalId a, std::uint32_t i, std::uint32_t j) const {
    return (static_cast<std::size_t>(a) * stride_ + i) * stride_ + j;
  }
  std::size_t bwd(NonterminalId a, std::uint32_t j, std::uint32_t i) const {
    return (static_cast<std::size_t>(a) * stride_ + j) * stride_ + i;
  }

  const ExpandedGrammar* g_;
  MatchMode mode_;
  std::vector<double> log_probs_;
  std::size_t stride_ = 0;
  std::vector<double> score_;      // V_A(i, j), indexed by fwd()
  std::vector<double> score_bwd_;  // same values, indexed by bwd()
  std::vector<char> ok_;           // boolean chart
  std::vector<char> ok_bwd_;
};

std::optional<ViterbiResult> viterbi_parse(const ExpandedGrammar& g, std::span<const Terminal> word,
                                           std::span<const double> probs, MatchMode mode);

// Structure-only convenience: parses a dot-bracket word with the bare SRF rules.
std::optional<ViterbiResult> viterbi_parse(const SrfGrammar& g, std::string_view dot_bracket,
                                           std::span<const double> probs);

// Boolean-semiring CYK on a dot-bracket word.
bool parseable(const SrfGrammar& g, std::string_view dot_bracket);

// Leftmost replay. Throws MalformedDerivation.
Word replay(const ExpandedGrammar& g, const Derivation& d);

double derivation_log2_prob(const Derivation& d, std::span<const double> probs);

// Most likely structure for a base sequence. Throws Unparseable.
std::string predict(const ExpandedGrammar& g, std::span<const double> probs, std::string_view sequence);

}  // namespace srf
