#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace srf {

using NonterminalId = std::uint32_t;

// Declaration order is the canonical rule order.
enum class RuleKind : std::uint8_t { kPairSplit, kUnpaired, kBond, kChain };

// One SRF rule:
//   kPairSplit  lhs -> first second
//   kUnpaired   lhs -> .
//   kBond       lhs -> ( first )
//   kChain      lhs -> first          (first < lhs)
// Unused child slots are zero.
struct Rule {
  RuleKind kind = RuleKind::kUnpaired;
  NonterminalId lhs = 0;
  NonterminalId first = 0;
  NonterminalId second = 0;

  static Rule pair_split(NonterminalId lhs, NonterminalId left, NonterminalId right) {
    return {RuleKind::kPairSplit, lhs, left, right};
  }
  static Rule unpaired(NonterminalId lhs) { return {RuleKind::kUnpaired, lhs, 0, 0}; }
  static Rule bond(NonterminalId lhs, NonterminalId inner) { return {RuleKind::kBond, lhs, inner, 0}; }
  static Rule chain(NonterminalId lhs, NonterminalId target) { return {RuleKind::kChain, lhs, target, 0}; }

  auto operator<=>(const Rule&) const = default;
};

std::string to_string(const Rule& rule);

// Number of possible SRF rules over k nonterminals: k^3 + k + k^2 + k(k-1)/2.
std::uint64_t universe_size(std::uint32_t k);

// Position of `rule` in rule_universe(k).
std::uint64_t universe_index(std::uint32_t k, const Rule& rule);
Rule universe_rule(std::uint32_t k, std::uint64_t index);

// All possible SRF rules over k nonterminals in canonical order.
std::vector<Rule> rule_universe(std::uint32_t k);

class SrfGrammar {
 public:
  std::uint32_t nonterminals() const { return k_; }
  NonterminalId start() const { return k_ - 1; }
  const std::vector<Rule>& rules() const { return rules_; }
  std::size_t size() const { return rules_.size(); }

  // Sorted universe indices of the rules.
  std::vector<std::uint64_t> universe_indices() const;

  bool operator==(const SrfGrammar&) const = default;

 private:
  friend SrfGrammar validate_srf(std::uint32_t k, std::vector<Rule> rules);
  friend SrfGrammar grammar_from_sorted_universe(std::uint32_t k, const std::vector<std::uint64_t>& indices);

  std::uint32_t k_ = 1;
  std::vector<Rule> rules_;
};

// Checks the normal form and returns the canonical grammar. Throws
// IndexOutOfRange, ChainNotDescending or DuplicateRule.
SrfGrammar validate_srf(std::uint32_t k, std::vector<Rule> rules);

// Fast path for strictly increasing universe indices (always valid).
SrfGrammar grammar_from_sorted_universe(std::uint32_t k, const std::vector<std::uint64_t>& indices);

// Removes non-productive and unreachable nonterminals, renumbering the
// survivors in their original relative order. Throws StartSymbolDead.
SrfGrammar prune_dead(const SrfGrammar& g);

// Text format: one rule per line, '#' comments, optional "nts: <k>" header.
SrfGrammar parse_grammar(std::string_view text);
SrfGrammar load_grammar(const std::string& path);
std::string format_grammar(const SrfGrammar& g);

// ---------------------------------------------------------------------------
// Terminals and expansion

enum class Base : std::uint8_t { kA, kC, kG, kU, kAny };
enum class StructSym : std::uint8_t { kDot, kOpen, kClose, kAny };

struct Terminal {
  Base base = Base::kAny;
  StructSym sym = StructSym::kAny;

  bool operator==(const Terminal&) const = default;
};

char base_char(Base b);
Base base_from_char(char c);  // kAny for anything outside ACGU
char struct_char(StructSym s);

using Word = std::vector<Terminal>;

Word structure_word(std::string_view dot_bracket);
Word sequence_word(std::string_view bases);
Word joint_word(std::string_view bases, std::string_view dot_bracket);
std::string word_structure(const Word& w);
std::string word_sequence(const Word& w);

// kStructure keeps the rules 1:1 with unconstrained bases; it is the view
// the structure-only (dot-bracket) parser works on.
enum class ExpansionMode : std::uint8_t { kStructure, kCanonical6, kAll16 };

std::string_view to_string(ExpansionMode mode);
ExpansionMode expansion_mode_from_string(std::string_view s);

struct ExpandedRule {
  RuleKind kind = RuleKind::kUnpaired;
  NonterminalId lhs = 0;
  NonterminalId first = 0;
  NonterminalId second = 0;
  Base left_base = Base::kAny;   // unpaired base, or opening base of a bond
  Base right_base = Base::kAny;  // closing base of a bond
  std::uint32_t origin = 0;      // index into base().rules()
};

class ExpandedGrammar {
 public:
  ExpandedGrammar(SrfGrammar base, ExpansionMode mode);

  const SrfGrammar& base() const { return base_; }
  ExpansionMode mode() const { return mode_; }
  std::uint32_t nonterminals() const { return base_.nonterminals(); }
  NonterminalId start() const { return base_.start(); }
  const std::vector<ExpandedRule>& rules() const { return rules_; }
  std::size_t size() const { return rules_.size(); }

  // Expanded rule ids with the given lhs, ascending.
  const std::vector<std::uint32_t>& rules_of(NonterminalId lhs) const { return by_lhs_[lhs]; }

 private:
  SrfGrammar base_;
  ExpansionMode mode_;
  std::vector<ExpandedRule> rules_;
  std::vector<std::vector<std::uint32_t>> by_lhs_;
};

ExpandedGrammar expand(const SrfGrammar& g, ExpansionMode mode);

// Canonical base pairs AU CG GC GU UA UG.
bool is_canonical_pair(Base left, Base right);

}  // namespace srf
