#include "oracles.hpp"

#include <algorithm>
#include <cmath>

namespace oracle {

namespace {

// Symbol of a sentential form: a terminal character or a nonterminal.
struct Sym {
  bool terminal;
  char ch;
  std::uint32_t nt;
};

struct Walker {
  const srf::SrfGrammar& g;
  std::size_t max_len;
  std::vector<double> lhs_cost;  // -log2 of the uniform rule probability
  std::map<std::string, double> best;

  void visit(std::string prefix, std::vector<Sym> rest, double logp) {
    std::size_t pos = 0;
    while (pos < rest.size() && rest[pos].terminal) prefix += rest[pos++].ch;
    rest.erase(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(pos));
    if (rest.empty()) {
      auto [it, fresh] = best.emplace(prefix, logp);
      if (!fresh) it->second = std::max(it->second, logp);
      return;
    }
    const std::uint32_t a = rest.front().nt;
    for (const srf::Rule& r : g.rules()) {
      if (r.lhs != a) continue;
      std::vector<Sym> rhs;
      switch (r.kind) {
        case srf::RuleKind::kPairSplit: rhs = {{false, 0, r.first}, {false, 0, r.second}}; break;
        case srf::RuleKind::kUnpaired: rhs = {{true, '.', 0}}; break;
        case srf::RuleKind::kBond: rhs = {{true, '(', 0}, {false, 0, r.first}, {true, ')', 0}}; break;
        case srf::RuleKind::kChain: rhs = {{false, 0, r.first}}; break;
      }
      // Each remaining symbol yields at least one terminal.
      if (prefix.size() + rest.size() - 1 + rhs.size() > max_len) continue;
      std::vector<Sym> next = rhs;
      next.insert(next.end(), rest.begin() + 1, rest.end());
      visit(prefix, std::move(next), logp - lhs_cost[a]);
    }
  }
};

}  // namespace

std::map<std::string, double> derivable_words(const srf::SrfGrammar& g, std::size_t max_len) {
  Walker w{g, max_len, std::vector<double>(g.nonterminals(), 0.0), {}};
  std::vector<int> per_lhs(g.nonterminals(), 0);
  for (const auto& r : g.rules()) ++per_lhs[r.lhs];
  for (std::uint32_t a = 0; a < g.nonterminals(); ++a) {
    if (per_lhs[a] > 0) w.lhs_cost[a] = std::log2(static_cast<double>(per_lhs[a]));
  }
  w.visit("", {{false, 0, g.start()}}, 0.0);
  return w.best;
}

std::uint64_t binomial(unsigned n, unsigned r) {
  if (r > n) return 0;
  std::vector<std::vector<std::uint64_t>> t(n + 1);
  for (unsigned i = 0; i <= n; ++i) {
    t[i].assign(i + 1, 1);
    for (unsigned j = 1; j < i; ++j) t[i][j] = t[i - 1][j - 1] + t[i - 1][j];
  }
  return t[n][r];
}

std::uint64_t universe_size(std::uint32_t k) {
  std::uint64_t n = 0;
  for (std::uint32_t a = 0; a < k; ++a) {
    for (std::uint32_t b = 0; b < k; ++b) {
      for (std::uint32_t c = 0; c < k; ++c) ++n;  // A -> B C
      ++n;                                        // A -> ( B )
      if (b < a) ++n;                             // A -> B
    }
    ++n;  // A -> .
  }
  return n;
}

std::vector<std::string> all_words(std::size_t n) {
  std::vector<std::string> out{""};
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::string> next;
    for (const auto& w : out) {
      for (char c : {'.', '(', ')'}) next.push_back(w + c);
    }
    out = std::move(next);
  }
  return out;
}

std::vector<std::string> all_structures(std::size_t n) {
  std::vector<std::string> out;
  for (const auto& w : all_words(n)) {
    int depth = 0;
    bool ok = w.find("()") == std::string::npos;
    for (char c : w) {
      depth += c == '(' ? 1 : c == ')' ? -1 : 0;
      if (depth < 0) ok = false;
    }
    if (ok && depth == 0) out.push_back(w);
  }
  return out;
}

std::vector<std::vector<std::uint64_t>> colex_subsets(unsigned u, unsigned r) {
  // Colex order on r-subsets is numeric order of their bitmasks.
  std::vector<std::vector<std::uint64_t>> out;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << u); ++mask) {
    if (static_cast<unsigned>(__builtin_popcountll(mask)) != r) continue;
    std::vector<std::uint64_t> s;
    for (unsigned i = 0; i < u; ++i) {
      if (mask >> i & 1) s.push_back(i);
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace oracle
