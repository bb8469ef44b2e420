#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "srf/data.hpp"
#include "srf/grammar.hpp"

namespace srf {

// Per-rule counts; the probability of a rule is its count over the total of
// the rules sharing its left-hand side.
class RuleCounts {
 public:
  RuleCounts(const ExpandedGrammar& g, std::vector<std::uint64_t> counts);

  std::size_t size() const { return counts_.size(); }
  std::uint64_t count(std::uint32_t rule) const { return counts_[rule]; }
  std::uint64_t lhs_total(NonterminalId lhs) const { return totals_[lhs]; }
  NonterminalId lhs_of(std::uint32_t rule) const { return lhs_of_[rule]; }
  const std::vector<std::uint32_t>& rules_of(NonterminalId lhs) const { return by_lhs_[lhs]; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }

  double probability(std::uint32_t rule) const;
  // Probabilities of rules_of(lhs), in that order.
  std::vector<double> distribution(NonterminalId lhs) const;
  // One probability per rule, as the parser expects.
  std::vector<double> probabilities() const;

 protected:
  std::vector<std::uint64_t> counts_;
  std::vector<std::uint64_t> totals_;
  std::vector<NonterminalId> lhs_of_;
  std::vector<std::vector<std::uint32_t>> by_lhs_;
};

class StaticModel : public RuleCounts {
 public:
  using RuleCounts::RuleCounts;

  static constexpr bool kAdaptive = false;
  void observe(std::uint32_t) {}
};

// Running counts starting at 1 for every rule.
class AdaptiveModel : public RuleCounts {
 public:
  explicit AdaptiveModel(const ExpandedGrammar& g);

  static constexpr bool kAdaptive = true;

  std::vector<double> adaptive_prob(NonterminalId lhs) const { return distribution(lhs); }
  // Throws UnknownRule.
  void adaptive_update(std::uint32_t rule);
  void observe(std::uint32_t rule) { adaptive_update(rule); }
  void reset();

  bool operator==(const AdaptiveModel& o) const { return counts_ == o.counts_; }
};

// Counts rule uses in the uniform-probability Viterbi derivation of every
// record, plus one per rule. Throws UnparseableRecord.
StaticModel train_static(const ExpandedGrammar& g, const std::vector<RnaRecord>& dataset);

std::string format_static_model(const StaticModel& m, const ExpandedGrammar& g, const std::string& grammar_name);
void save_static_model(const StaticModel& m, const ExpandedGrammar& g, const std::string& grammar_name,
                       const std::string& path);
// Throws ModelMismatch when the file's rule count or mode differs from g.
StaticModel load_static_model(const std::string& path, const ExpandedGrammar& g);

}  // namespace srf
