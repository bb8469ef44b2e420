#include "srf/parser.hpp"

#include <cmath>
#include <limits>
#include <type_traits>

#include "srf/error.hpp"

namespace srf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Near-equal scores count as ties so that the smallest rule id (then the
// smallest split point) wins regardless of summation order.
constexpr double kTieEpsilon = 1e-10;

struct ViterbiSemiring {
  using value_type = double;
  static double zero() { return kNegInf; }
  static bool is_zero(double v) { return v == kNegInf; }
  static double times(double a, double b) { return a + b; }
  static bool better(double a, double b) { return a > b + kTieEpsilon; }
};

struct BooleanSemiring {
  using value_type = char;
  static char zero() { return 0; }
  static bool is_zero(char v) { return v == 0; }
  static char times(char a, char b) { return static_cast<char>(a && b); }
  static bool better(char a, char b) { return a && !b; }
};

bool base_ok(Base rule_base, Base word_base) {
  return rule_base == Base::kAny || word_base == Base::kAny || rule_base == word_base;
}

}  // namespace

std::vector<double> uniform_probabilities(const ExpandedGrammar& g) {
  std::vector<double> p(g.size(), 0.0);
  for (NonterminalId a = 0; a < g.nonterminals(); ++a) {
    const auto& ids = g.rules_of(a);
    for (std::uint32_t id : ids) p[id] = 1.0 / static_cast<double>(ids.size());
  }
  return p;
}

void check_probabilities(const ExpandedGrammar& g, std::span<const double> probs) {
  if (probs.size() != g.size()) {
    fail(Errc::kProbabilityInvalid,
         "expected " + std::to_string(g.size()) + " rule probabilities, got " + std::to_string(probs.size()));
  }
  for (NonterminalId a = 0; a < g.nonterminals(); ++a) {
    const auto& ids = g.rules_of(a);
    if (ids.empty()) continue;
    double sum = 0.0;
    for (std::uint32_t id : ids) {
      const double p = probs[id];
      if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
        fail(Errc::kProbabilityInvalid, "rule " + std::to_string(id) + " has probability " + std::to_string(p));
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      fail(Errc::kProbabilityInvalid, "rules of A" + std::to_string(a) + " sum to " + std::to_string(sum));
    }
  }
}

ViterbiParser::ViterbiParser(const ExpandedGrammar& g, std::span<const double> probs, MatchMode mode)
    : g_(&g), mode_(mode) {
  check_probabilities(g, probs);
  log_probs_.reserve(probs.size());
  for (double p : probs) log_probs_.push_back(p > 0.0 ? std::log2(p) : kNegInf);
}

bool ViterbiParser::unpaired_matches(const ExpandedRule& r, const Terminal& t) const {
  switch (mode_) {
    case MatchMode::kStructure: return t.sym == StructSym::kDot;
    case MatchMode::kJoint: return t.sym == StructSym::kDot && base_ok(r.left_base, t.base);
    case MatchMode::kSequence: return base_ok(r.left_base, t.base);
  }
  return false;
}

bool ViterbiParser::bond_matches(const ExpandedRule& r, const Terminal& open, const Terminal& close) const {
  const bool syms = open.sym == StructSym::kOpen && close.sym == StructSym::kClose;
  const bool bases = base_ok(r.left_base, open.base) && base_ok(r.right_base, close.base);
  switch (mode_) {
    case MatchMode::kStructure: return syms;
    case MatchMode::kJoint: return syms && bases;
    case MatchMode::kSequence: return bases;
  }
  return false;
}

template <typename Semiring>
ViterbiParser::Choice ViterbiParser::relax(NonterminalId a, std::uint32_t i, std::uint32_t j,
                                           std::span<const Terminal> word,
                                           typename Semiring::value_type& best) const {
  using V = typename Semiring::value_type;
  const std::vector<V>* table;
  const std::vector<V>* table_bwd;
  if constexpr (std::is_same_v<Semiring, ViterbiSemiring>) {
    table = &score_;
    table_bwd = &score_bwd_;
  } else {
    table = &ok_;
    table_bwd = &ok_bwd_;
  }
  const std::uint32_t len = j - i;
  Choice choice;
  auto offer = [&](V cand, std::uint32_t id, std::uint32_t split) {
    if (Semiring::better(cand, best)) {
      best = cand;
      choice = {id, split};
    }
  };
  for (std::uint32_t id : g_->rules_of(a)) {
    if (log_probs_[id] == kNegInf) continue;
    V w;
    if constexpr (std::is_same_v<Semiring, ViterbiSemiring>) {
      w = log_probs_[id];
    } else {
      w = 1;
    }
    const ExpandedRule& r = g_->rules()[id];
    switch (r.kind) {
      case RuleKind::kUnpaired:
        if (len == 1 && unpaired_matches(r, word[i])) offer(w, id, 0);
        break;
      case RuleKind::kBond:
        if (len >= 3 && bond_matches(r, word[i], word[j - 1])) {
          const V inner = (*table)[fwd(r.first, i + 1, j - 1)];
          if (!Semiring::is_zero(inner)) offer(Semiring::times(w, inner), id, 0);
        }
        break;
      case RuleKind::kChain: {
        const V inner = (*table)[fwd(r.first, i, j)];
        if (!Semiring::is_zero(inner)) offer(Semiring::times(w, inner), id, 0);
        break;
      }
      case RuleKind::kPairSplit: {
        const V* left = &(*table)[fwd(r.first, i, 0)];
        const V* right = &(*table_bwd)[bwd(r.second, j, 0)];
        for (std::uint32_t k = i + 1; k < j; ++k) {
          if (Semiring::is_zero(left[k]) || Semiring::is_zero(right[k])) continue;
          offer(Semiring::times(w, Semiring::times(left[k], right[k])), id, k);
        }
        break;
      }
    }
    if constexpr (std::is_same_v<Semiring, BooleanSemiring>) {
      if (best) break;
    }
  }
  return choice;
}

template <typename Semiring>
void ViterbiParser::fill(std::span<const Terminal> word) {
  using V = typename Semiring::value_type;
  const auto n = static_cast<std::uint32_t>(word.size());
  const std::uint32_t k = g_->nonterminals();
  stride_ = static_cast<std::size_t>(n) + 1;
  std::vector<V>* table;
  std::vector<V>* table_bwd;
  if constexpr (std::is_same_v<Semiring, ViterbiSemiring>) {
    table = &score_;
    table_bwd = &score_bwd_;
  } else {
    table = &ok_;
    table_bwd = &ok_bwd_;
  }
  table->assign(k * stride_ * stride_, Semiring::zero());
  table_bwd->assign(k * stride_ * stride_, Semiring::zero());
  for (std::uint32_t len = 1; len <= n; ++len) {
    for (std::uint32_t i = 0; i + len <= n; ++i) {
      const std::uint32_t j = i + len;
      for (NonterminalId a = 0; a < k; ++a) {
        V best = Semiring::zero();
        relax<Semiring>(a, i, j, word, best);
        (*table)[fwd(a, i, j)] = best;
        (*table_bwd)[bwd(a, j, i)] = best;
      }
    }
  }
}

bool ViterbiParser::accepts(std::span<const Terminal> word) {
  if (word.empty()) return false;
  fill<BooleanSemiring>(word);
  return ok_[fwd(g_->start(), 0, static_cast<std::uint32_t>(word.size()))] != 0;
}

std::optional<ViterbiResult> ViterbiParser::parse(std::span<const Terminal> word) {
  if (word.empty()) return std::nullopt;
  fill<ViterbiSemiring>(word);
  const auto n = static_cast<std::uint32_t>(word.size());
  const double total = score_[fwd(g_->start(), 0, n)];
  if (total == kNegInf) return std::nullopt;

  ViterbiResult result;
  result.log2_prob = total;
  struct Cell {
    NonterminalId a;
    std::uint32_t i, j;
  };
  std::vector<Cell> todo{{g_->start(), 0, n}};
  while (!todo.empty()) {
    const Cell c = todo.back();
    todo.pop_back();
    double best = kNegInf;
    const Choice choice = relax<ViterbiSemiring>(c.a, c.i, c.j, word, best);
    if (choice.rule < 0) fail(Errc::kUnparseable, "internal: backtrace reached an empty cell");
    const auto id = static_cast<std::uint32_t>(choice.rule);
    result.derivation.rule_ids.push_back(id);
    const ExpandedRule& r = g_->rules()[id];
    switch (r.kind) {
      case RuleKind::kUnpaired: break;
      case RuleKind::kBond: todo.push_back({r.first, c.i + 1, c.j - 1}); break;
      case RuleKind::kChain: todo.push_back({r.first, c.i, c.j}); break;
      case RuleKind::kPairSplit:
        todo.push_back({r.second, choice.split, c.j});
        todo.push_back({r.first, c.i, choice.split});
        break;
    }
  }
  return result;
}

std::optional<ViterbiResult> viterbi_parse(const ExpandedGrammar& g, std::span<const Terminal> word,
                                           std::span<const double> probs, MatchMode mode) {
  ViterbiParser parser(g, probs, mode);
  return parser.parse(word);
}

std::optional<ViterbiResult> viterbi_parse(const SrfGrammar& g, std::string_view dot_bracket,
                                           std::span<const double> probs) {
  const ExpandedGrammar eg(g, ExpansionMode::kStructure);
  const Word w = structure_word(dot_bracket);
  return viterbi_parse(eg, w, probs, MatchMode::kStructure);
}

bool parseable(const SrfGrammar& g, std::string_view dot_bracket) {
  const ExpandedGrammar eg(g, ExpansionMode::kStructure);
  const auto probs = uniform_probabilities(eg);
  ViterbiParser parser(eg, probs, MatchMode::kStructure);
  const Word w = structure_word(dot_bracket);
  return parser.accepts(w);
}

Word replay(const ExpandedGrammar& g, const Derivation& d) {
  struct Item {
    bool nonterminal;
    NonterminalId id;
    Terminal t;
  };
  Word out;
  std::vector<Item> stack{{true, g.start(), {}}};
  std::size_t step = 0;
  const auto& ids = d.rule_ids;
  while (!stack.empty()) {
    const Item item = stack.back();
    stack.pop_back();
    if (!item.nonterminal) {
      out.push_back(item.t);
      continue;
    }
    if (step == ids.size()) {
      fail(Errc::kMalformedDerivation, "derivation ends with A" + std::to_string(item.id) + " unexpanded");
    }
    const std::uint32_t id = ids[step++];
    if (id >= g.size()) fail(Errc::kMalformedDerivation, "rule id " + std::to_string(id) + " out of range");
    const ExpandedRule& r = g.rules()[id];
    if (r.lhs != item.id) {
      fail(Errc::kMalformedDerivation, "step " + std::to_string(step - 1) + ": rule lhs A" + std::to_string(r.lhs) +
                                           " but leftmost nonterminal is A" + std::to_string(item.id));
    }
    switch (r.kind) {
      case RuleKind::kUnpaired: stack.push_back({false, 0, {r.left_base, StructSym::kDot}}); break;
      case RuleKind::kBond:
        stack.push_back({false, 0, {r.right_base, StructSym::kClose}});
        stack.push_back({true, r.first, {}});
        stack.push_back({false, 0, {r.left_base, StructSym::kOpen}});
        break;
      case RuleKind::kChain: stack.push_back({true, r.first, {}}); break;
      case RuleKind::kPairSplit:
        stack.push_back({true, r.second, {}});
        stack.push_back({true, r.first, {}});
        break;
    }
  }
  if (step != ids.size()) {
    fail(Errc::kMalformedDerivation,
         std::to_string(ids.size() - step) + " rule(s) left after the word became all terminals");
  }
  return out;
}

double derivation_log2_prob(const Derivation& d, std::span<const double> probs) {
  double sum = 0.0;
  for (std::uint32_t id : d.rule_ids) sum += std::log2(probs[id]);
  return sum;
}

std::string predict(const ExpandedGrammar& g, std::span<const double> probs, std::string_view sequence) {
  const Word w = sequence_word(sequence);
  auto result = viterbi_parse(g, w, probs, MatchMode::kSequence);
  if (!result) fail(Errc::kUnparseable, "no derivation for sequence of length " + std::to_string(w.size()));
  return word_structure(replay(g, result->derivation));
}

}  // namespace srf
