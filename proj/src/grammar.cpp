#include "srf/grammar.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <optional>
#include <sstream>

#include "srf/error.hpp"

namespace srf {

namespace {

std::string nt_name(NonterminalId id) { return "A" + std::to_string(id); }

std::uint64_t chain_offset(std::uint64_t lhs) { return lhs * (lhs - 1) / 2; }

}  // namespace

std::string to_string(const Rule& rule) {
  std::string s = nt_name(rule.lhs) + " -> ";
  switch (rule.kind) {
    case RuleKind::kPairSplit: return s + nt_name(rule.first) + " " + nt_name(rule.second);
    case RuleKind::kUnpaired: return s + "u";
    case RuleKind::kBond: return s + "( " + nt_name(rule.first) + " )";
    case RuleKind::kChain: return s + nt_name(rule.first);
  }
  return s;
}

std::uint64_t universe_size(std::uint32_t k) {
  const std::uint64_t n = k;
  return n * n * n + n + n * n + n * (n - 1) / 2;
}

std::uint64_t universe_index(std::uint32_t k, const Rule& rule) {
  const std::uint64_t n = k;
  switch (rule.kind) {
    case RuleKind::kPairSplit: return (rule.lhs * n + rule.first) * n + rule.second;
    case RuleKind::kUnpaired: return n * n * n + rule.lhs;
    case RuleKind::kBond: return n * n * n + n + rule.lhs * n + rule.first;
    case RuleKind::kChain: return n * n * n + n + n * n + chain_offset(rule.lhs) + rule.first;
  }
  return 0;
}

Rule universe_rule(std::uint32_t k, std::uint64_t index) {
  const std::uint64_t n = k;
  if (index < n * n * n) {
    return Rule::pair_split(static_cast<NonterminalId>(index / (n * n)),
                            static_cast<NonterminalId>(index / n % n), static_cast<NonterminalId>(index % n));
  }
  index -= n * n * n;
  if (index < n) return Rule::unpaired(static_cast<NonterminalId>(index));
  index -= n;
  if (index < n * n) {
    return Rule::bond(static_cast<NonterminalId>(index / n), static_cast<NonterminalId>(index % n));
  }
  index -= n * n;
  if (index >= n * (n - 1) / 2) fail(Errc::kIndexOutOfRange, "universe index beyond rule universe");
  NonterminalId lhs = 1;
  while (chain_offset(lhs + 1) <= index) ++lhs;
  return Rule::chain(lhs, static_cast<NonterminalId>(index - chain_offset(lhs)));
}

std::vector<Rule> rule_universe(std::uint32_t k) {
  if (k == 0) fail(Errc::kIndexOutOfRange, "grammar needs at least one nonterminal");
  std::vector<Rule> out;
  out.reserve(universe_size(k));
  for (NonterminalId a = 0; a < k; ++a)
    for (NonterminalId b = 0; b < k; ++b)
      for (NonterminalId c = 0; c < k; ++c) out.push_back(Rule::pair_split(a, b, c));
  for (NonterminalId a = 0; a < k; ++a) out.push_back(Rule::unpaired(a));
  for (NonterminalId a = 0; a < k; ++a)
    for (NonterminalId b = 0; b < k; ++b) out.push_back(Rule::bond(a, b));
  for (NonterminalId a = 1; a < k; ++a)
    for (NonterminalId b = 0; b < a; ++b) out.push_back(Rule::chain(a, b));
  return out;
}

std::vector<std::uint64_t> SrfGrammar::universe_indices() const {
  std::vector<std::uint64_t> out;
  out.reserve(rules_.size());
  for (const Rule& r : rules_) out.push_back(universe_index(k_, r));
  return out;
}

SrfGrammar validate_srf(std::uint32_t k, std::vector<Rule> rules) {
  if (k == 0) fail(Errc::kIndexOutOfRange, "grammar needs at least one nonterminal");
  for (Rule& r : rules) {
    const bool uses_first = r.kind != RuleKind::kUnpaired;
    const bool uses_second = r.kind == RuleKind::kPairSplit;
    if (!uses_first) r.first = 0;
    if (!uses_second) r.second = 0;
    if (r.lhs >= k || (uses_first && r.first >= k) || (uses_second && r.second >= k)) {
      fail(Errc::kIndexOutOfRange, to_string(r) + " with k=" + std::to_string(k));
    }
    if (r.kind == RuleKind::kChain && r.first >= r.lhs) fail(Errc::kChainNotDescending, to_string(r));
  }
  std::sort(rules.begin(), rules.end());
  auto dup = std::adjacent_find(rules.begin(), rules.end());
  if (dup != rules.end()) fail(Errc::kDuplicateRule, to_string(*dup));
  SrfGrammar g;
  g.k_ = k;
  g.rules_ = std::move(rules);
  return g;
}

SrfGrammar grammar_from_sorted_universe(std::uint32_t k, const std::vector<std::uint64_t>& indices) {
  SrfGrammar g;
  g.k_ = k;
  g.rules_.reserve(indices.size());
  for (std::uint64_t i : indices) g.rules_.push_back(universe_rule(k, i));
  return g;
}

SrfGrammar prune_dead(const SrfGrammar& g) {
  const std::uint32_t k = g.nonterminals();
  std::vector<bool> productive(k, false);
  for (bool changed = true; changed;) {
    changed = false;
    for (const Rule& r : g.rules()) {
      if (productive[r.lhs]) continue;
      bool ok = false;
      switch (r.kind) {
        case RuleKind::kUnpaired: ok = true; break;
        case RuleKind::kBond:
        case RuleKind::kChain: ok = productive[r.first]; break;
        case RuleKind::kPairSplit: ok = productive[r.first] && productive[r.second]; break;
      }
      if (ok) productive[r.lhs] = changed = true;
    }
  }
  if (!productive[g.start()]) fail(Errc::kStartSymbolDead, "start symbol derives no terminal string");

  auto rule_alive = [&](const Rule& r) {
    if (!productive[r.lhs]) return false;
    if (r.kind != RuleKind::kUnpaired && !productive[r.first]) return false;
    if (r.kind == RuleKind::kPairSplit && !productive[r.second]) return false;
    return true;
  };

  std::vector<bool> reachable(k, false);
  std::vector<NonterminalId> todo{g.start()};
  reachable[g.start()] = true;
  while (!todo.empty()) {
    NonterminalId a = todo.back();
    todo.pop_back();
    for (const Rule& r : g.rules()) {
      if (r.lhs != a || !rule_alive(r)) continue;
      auto visit = [&](NonterminalId b) {
        if (!reachable[b]) {
          reachable[b] = true;
          todo.push_back(b);
        }
      };
      if (r.kind != RuleKind::kUnpaired) visit(r.first);
      if (r.kind == RuleKind::kPairSplit) visit(r.second);
    }
  }

  std::vector<NonterminalId> renumber(k, 0);
  std::uint32_t kept = 0;
  for (NonterminalId a = 0; a < k; ++a) {
    if (productive[a] && reachable[a]) renumber[a] = kept++;
  }
  std::vector<Rule> rules;
  for (const Rule& r : g.rules()) {
    if (!rule_alive(r) || !reachable[r.lhs]) continue;
    Rule n = r;
    n.lhs = renumber[r.lhs];
    if (r.kind != RuleKind::kUnpaired) n.first = renumber[r.first];
    if (r.kind == RuleKind::kPairSplit) n.second = renumber[r.second];
    rules.push_back(n);
  }
  return validate_srf(kept, std::move(rules));
}

// ---------------------------------------------------------------------------
// Text format

namespace {

std::vector<std::string> tokenize(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    const char c = line[i];
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
    } else if (c == '(' || c == ')') {
      out.emplace_back(1, c);
      ++i;
    } else if (line.substr(i, 2) == "->") {
      out.emplace_back("->");
      i += 2;
    } else {
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r' && line[j] != '(' &&
             line[j] != ')' && line.substr(j, 2) != "->") {
        ++j;
      }
      out.emplace_back(line.substr(i, j - i));
      i = j;
    }
  }
  return out;
}

std::optional<NonterminalId> parse_nt(const std::string& tok) {
  if (tok.size() < 2 || tok[0] != 'A') return std::nullopt;
  std::size_t start = tok[1] == '_' ? 2 : 1;
  if (start >= tok.size()) return std::nullopt;
  std::uint64_t v = 0;
  for (std::size_t i = start; i < tok.size(); ++i) {
    if (tok[i] < '0' || tok[i] > '9') return std::nullopt;
    v = v * 10 + static_cast<std::uint64_t>(tok[i] - '0');
    if (v > 1'000'000) return std::nullopt;
  }
  return static_cast<NonterminalId>(v);
}

bool is_unpaired_token(const std::string& tok) { return tok == "u" || tok == "." || tok == "\xE2\x80\xA2"; }

}  // namespace

SrfGrammar parse_grammar(std::string_view text) {
  std::optional<std::uint32_t> header_k;
  std::vector<Rule> rules;
  std::uint32_t max_index = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto toks = tokenize(line);
    if (toks.empty()) continue;
    auto where = [&] { return "line " + std::to_string(line_no); };
    if (toks[0] == "nts:" || toks[0] == "nts") {
      std::size_t vi = toks[0] == "nts" ? 2 : 1;
      if (toks.size() != vi + 1 || (vi == 2 && toks[1] != ":")) fail(Errc::kGrammarSyntax, where() + ": bad nts header");
      try {
        header_k = static_cast<std::uint32_t>(std::stoul(toks[vi]));
      } catch (const std::exception&) {
        fail(Errc::kGrammarSyntax, where() + ": bad nts header");
      }
      continue;
    }
    if (toks.size() < 3 || toks[1] != "->") fail(Errc::kGrammarSyntax, where() + ": expected '<A_i> -> ...'");
    auto lhs = parse_nt(toks[0]);
    if (!lhs) fail(Errc::kGrammarSyntax, where() + ": bad left-hand side '" + toks[0] + "'");
    std::vector<std::string> rhs(toks.begin() + 2, toks.end());
    Rule rule;
    if (rhs.size() == 1 && is_unpaired_token(rhs[0])) {
      rule = Rule::unpaired(*lhs);
    } else if (rhs.size() == 1 && parse_nt(rhs[0])) {
      rule = Rule::chain(*lhs, *parse_nt(rhs[0]));
    } else if (rhs.size() == 2 && parse_nt(rhs[0]) && parse_nt(rhs[1])) {
      rule = Rule::pair_split(*lhs, *parse_nt(rhs[0]), *parse_nt(rhs[1]));
    } else if (rhs.size() == 3 && rhs[0] == "(" && rhs[2] == ")" && parse_nt(rhs[1])) {
      rule = Rule::bond(*lhs, *parse_nt(rhs[1]));
    } else {
      fail(Errc::kGrammarSyntax, where() + ": right-hand side is not an SRF form");
    }
    max_index = std::max({max_index, rule.lhs, rule.first, rule.second});
    rules.push_back(rule);
  }
  const std::uint32_t k = header_k ? *header_k : max_index + 1;
  return validate_srf(k, std::move(rules));
}

SrfGrammar load_grammar(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::kIo, "cannot open grammar file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_grammar(ss.str());
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + std::string(e.what()));
  }
}

std::string format_grammar(const SrfGrammar& g) {
  std::string out = "nts: " + std::to_string(g.nonterminals()) + "\n";
  for (const Rule& r : g.rules()) out += to_string(r) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Terminals and expansion

char base_char(Base b) {
  switch (b) {
    case Base::kA: return 'A';
    case Base::kC: return 'C';
    case Base::kG: return 'G';
    case Base::kU: return 'U';
    case Base::kAny: return 'N';
  }
  return 'N';
}

Base base_from_char(char c) {
  switch (c) {
    case 'A': case 'a': return Base::kA;
    case 'C': case 'c': return Base::kC;
    case 'G': case 'g': return Base::kG;
    case 'U': case 'u': case 'T': case 't': return Base::kU;
    default: return Base::kAny;
  }
}

char struct_char(StructSym s) {
  switch (s) {
    case StructSym::kDot: return '.';
    case StructSym::kOpen: return '(';
    case StructSym::kClose: return ')';
    case StructSym::kAny: return '?';
  }
  return '?';
}

namespace {

StructSym sym_from_char(char c) {
  switch (c) {
    case '.': return StructSym::kDot;
    case '(': return StructSym::kOpen;
    case ')': return StructSym::kClose;
    default: return StructSym::kAny;
  }
}

}  // namespace

Word structure_word(std::string_view dot_bracket) {
  Word w;
  w.reserve(dot_bracket.size());
  for (char c : dot_bracket) w.push_back({Base::kAny, sym_from_char(c)});
  return w;
}

Word sequence_word(std::string_view bases) {
  Word w;
  w.reserve(bases.size());
  for (char c : bases) w.push_back({base_from_char(c), StructSym::kAny});
  return w;
}

Word joint_word(std::string_view bases, std::string_view dot_bracket) {
  Word w;
  const std::size_t n = std::min(bases.size(), dot_bracket.size());
  w.reserve(n);
  for (std::size_t i = 0; i < n; ++i) w.push_back({base_from_char(bases[i]), sym_from_char(dot_bracket[i])});
  return w;
}

std::string word_structure(const Word& w) {
  std::string s;
  s.reserve(w.size());
  for (const Terminal& t : w) s.push_back(struct_char(t.sym));
  return s;
}

std::string word_sequence(const Word& w) {
  std::string s;
  s.reserve(w.size());
  for (const Terminal& t : w) s.push_back(base_char(t.base));
  return s;
}

std::string_view to_string(ExpansionMode mode) {
  switch (mode) {
    case ExpansionMode::kStructure: return "structure";
    case ExpansionMode::kCanonical6: return "canonical6";
    case ExpansionMode::kAll16: return "all16";
  }
  return "?";
}

ExpansionMode expansion_mode_from_string(std::string_view s) {
  if (s == "canonical6") return ExpansionMode::kCanonical6;
  if (s == "all16") return ExpansionMode::kAll16;
  if (s == "structure") return ExpansionMode::kStructure;
  fail(Errc::kInvalidConfig, "unknown expansion mode '" + std::string(s) + "'");
}

namespace {

constexpr std::array<Base, 4> kBases{Base::kA, Base::kC, Base::kG, Base::kU};
constexpr std::array<std::pair<Base, Base>, 6> kCanonicalPairs{{
    {Base::kA, Base::kU},
    {Base::kC, Base::kG},
    {Base::kG, Base::kC},
    {Base::kG, Base::kU},
    {Base::kU, Base::kA},
    {Base::kU, Base::kG},
}};

}  // namespace

bool is_canonical_pair(Base left, Base right) {
  return std::find(kCanonicalPairs.begin(), kCanonicalPairs.end(), std::pair{left, right}) !=
         kCanonicalPairs.end();
}

ExpandedGrammar::ExpandedGrammar(SrfGrammar base, ExpansionMode mode)
    : base_(std::move(base)), mode_(mode), by_lhs_(base_.nonterminals()) {
  const auto& src = base_.rules();
  for (std::uint32_t origin = 0; origin < src.size(); ++origin) {
    const Rule& r = src[origin];
    ExpandedRule e{r.kind, r.lhs, r.first, r.second, Base::kAny, Base::kAny, origin};
    if (mode_ == ExpansionMode::kStructure || r.kind == RuleKind::kPairSplit || r.kind == RuleKind::kChain) {
      rules_.push_back(e);
    } else if (r.kind == RuleKind::kUnpaired) {
      for (Base b : kBases) {
        e.left_base = b;
        rules_.push_back(e);
      }
    } else if (mode_ == ExpansionMode::kCanonical6) {
      for (auto [l, rb] : kCanonicalPairs) {
        e.left_base = l;
        e.right_base = rb;
        rules_.push_back(e);
      }
    } else {
      for (Base l : kBases) {
        for (Base rb : kBases) {
          e.left_base = l;
          e.right_base = rb;
          rules_.push_back(e);
        }
      }
    }
  }
  for (std::uint32_t id = 0; id < rules_.size(); ++id) by_lhs_[rules_[id].lhs].push_back(id);
}

ExpandedGrammar expand(const SrfGrammar& g, ExpansionMode mode) { return ExpandedGrammar(g, mode); }

}  // namespace srf
