#include "srf/search.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "srf/error.hpp"
#include "srf/parallel.hpp"
#include "srf/parser.hpp"

namespace srf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Uniform integer in [0, n) without modulo bias.
std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  while (true) {
    const std::uint64_t x = rng();
    if (x < limit) return x % n;
  }
}

std::mt19937_64 draw_rng(std::uint64_t seed, std::uint64_t draw) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(draw), static_cast<std::uint32_t>(draw >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

BigInt count_grammars(std::uint32_t k, std::uint64_t r) {
  if (k == 0) fail(Errc::kIndexOutOfRange, "k must be at least 1");
  return binomial(universe_size(k), r);
}

GrammarEnumerator::GrammarEnumerator(std::uint32_t k, std::uint64_t r, const BigInt& first_rank)
    : k_(k), universe_(universe_size(k)), rank_(first_rank) {
  if (r < 1 || r > universe_) {
    fail(Errc::kRuleCountOutOfRange, "r = " + std::to_string(r) + " outside [1, " + std::to_string(universe_) + "]");
  }
  if (first_rank >= binomial(universe_, r)) {
    done_ = true;
    return;
  }
  indices_ = subset_unrank(universe_, r, first_rank);
}

void GrammarEnumerator::next() {
  if (done_) return;
  // Colex successor: bump the lowest element that has room above it and
  // reset everything below it to 0, 1, 2, ...
  const std::size_t r = indices_.size();
  std::size_t i = 0;
  while (i + 1 < r && indices_[i] + 1 == indices_[i + 1]) ++i;
  if (indices_[i] + 1 >= (i + 1 < r ? indices_[i + 1] : universe_)) {
    done_ = true;
    return;
  }
  ++indices_[i];
  for (std::size_t j = 0; j < i; ++j) indices_[j] = j;
  ++rank_;
}

void enumerate_exhaustive(std::uint32_t k, std::uint64_t r, const std::function<void(const SrfGrammar&)>& visit) {
  for (GrammarEnumerator e(k, r); !e.done(); e.next()) visit(e.grammar());
}

SrfGrammar random_grammar(std::uint32_t k, std::uint64_t r, std::mt19937_64& rng) {
  const std::uint64_t u = universe_size(k);
  if (r < 1 || r > u) {
    fail(Errc::kRuleCountOutOfRange, "r = " + std::to_string(r) + " outside [1, " + std::to_string(u) + "]");
  }
  return grammar_from_sorted_universe(k, subset_unrank(u, r, uniform_below(binomial(u, r), rng)));
}

std::vector<RnaRecord> subsample(const std::vector<RnaRecord>& dataset, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) fail(Errc::kInvalidConfig, "fraction must lie in (0, 1]");
  const std::size_t n = dataset.size();
  // The epsilon keeps 0.1 * 340 at 34 rather than 35.
  const auto want = std::min<std::size_t>(n, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9)));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < want; ++i) std::swap(order[i], order[i + uniform_index(rng, n - i)]);
  order.resize(want);
  std::sort(order.begin(), order.end());
  std::vector<RnaRecord> out;
  out.reserve(want);
  for (std::size_t i : order) out.push_back(dataset[i]);
  return out;
}

std::vector<RnaRecord> build_parsable_set(const std::vector<RnaRecord>& benchmark, std::size_t max_length,
                                          std::size_t cap) {
  std::map<std::pair<std::size_t, std::string>, std::string> found;  // (len, structure) -> bases
  for (const auto& rec : benchmark) {
    const std::string& s = rec.structure;
    for (std::size_t i = 0; i < s.size(); ++i) {
      int depth = 0;
      for (std::size_t j = i; j < s.size() && j - i < max_length; ++j) {
        if (s[j] == '(') ++depth;
        if (s[j] == ')' && --depth < 0) break;
        if (depth != 0) continue;
        std::string sub = s.substr(i, j - i + 1);
        if (sub.find("()") != std::string::npos) continue;
        found.try_emplace({sub.size(), sub}, rec.sequence.substr(i, j - i + 1));
      }
    }
  }
  std::vector<RnaRecord> out;
  for (const auto& [key, bases] : found) {
    if (out.size() >= cap) break;
    out.push_back({"parsable" + std::to_string(out.size() + 1), bases, key.second});
  }
  return out;
}

double grammar_bpb(const SrfGrammar& g, const std::vector<RnaRecord>& dataset, ModelKind kind, ExpansionMode mode) {
  const ExpandedGrammar e(g, mode);
  EvaluateOptions opts;
  opts.kind = kind;
  try {
    return evaluate(dataset, e, opts).bits_per_base;
  } catch (const Error& err) {
    if (err.code() == Errc::kUnparseableRecord) return kInf;
    throw;
  }
}

bool parses_all(const SrfGrammar& g, const std::vector<RnaRecord>& structures) {
  const ExpandedGrammar e(g, ExpansionMode::kStructure);
  const auto probs = uniform_probabilities(e);
  ViterbiParser parser(e, probs, MatchMode::kStructure);
  for (const auto& rec : structures) {
    const Word w = structure_word(rec.structure);
    if (!parser.accepts(w)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

namespace {

struct Candidate {
  SrfGrammar grammar;
  BigInt rank;
  std::string key;
};

struct Evaluation {
  bool parses = false;
  double small = kInf;
  std::optional<double> benchmark;
};

bool ranked_before(const RankedGrammar& a, const RankedGrammar& b) {
  if (a.benchmark_bpb != b.benchmark_bpb) return a.benchmark_bpb < b.benchmark_bpb;
  if (a.grammar.nonterminals() != b.grammar.nonterminals()) return a.grammar.nonterminals() < b.grammar.nonterminals();
  if (a.grammar.size() != b.grammar.size()) return a.grammar.size() < b.grammar.size();
  return a.rank < b.rank;
}

std::string grammar_key(std::uint32_t k, std::size_t r, const BigInt& rank) {
  return std::to_string(k) + ":" + std::to_string(r) + ":" + rank.str();
}

std::string format_double_exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

struct Checkpoint {
  std::map<std::string, std::string> shards;  // shard id -> next rank/draw (decimal)
  SearchCounters counters;
  std::vector<RankedGrammar> ranked;
};

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::kIo, "cannot read checkpoint " + path);
  Checkpoint cp;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    bool ok = true;
    if (tag == "shard") {
      std::string id, next;
      ok = static_cast<bool>(ss >> id >> next);
      if (ok) cp.shards[id] = next;
    } else if (tag == "counters") {
      auto& c = cp.counters;
      ok = static_cast<bool>(ss >> c.generated >> c.parse_filtered >> c.small_filtered >> c.benchmarked);
    } else if (tag == "top") {
      std::uint32_t k = 0;
      std::uint64_t r = 0;
      std::string rank, small, bench;
      ok = static_cast<bool>(ss >> k >> r >> rank >> small >> bench);
      if (ok) {
        RankedGrammar rg{grammar_from_sorted_universe(k, subset_unrank(universe_size(k), r, BigInt(rank))),
                         BigInt(rank), std::strtod(small.c_str(), nullptr), std::strtod(bench.c_str(), nullptr)};
        cp.ranked.push_back(std::move(rg));
      }
    } else {
      ok = false;
    }
    if (!ok) fail(Errc::kParseError, path + ":" + std::to_string(line_no) + ": bad checkpoint line");
  }
  return cp;
}

void write_checkpoint(const std::string& path, const Checkpoint& cp) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) fail(Errc::kIo, "cannot write checkpoint " + tmp);
    out << "# srf search checkpoint; shard -> next rank\n";
    for (const auto& [id, next] : cp.shards) out << "shard " << id << ' ' << next << '\n';
    const auto& c = cp.counters;
    out << "counters " << c.generated << ' ' << c.parse_filtered << ' ' << c.small_filtered << ' ' << c.benchmarked
        << '\n';
    for (const auto& rg : cp.ranked) {
      out << "top " << rg.grammar.nonterminals() << ' ' << rg.grammar.size() << ' ' << rg.rank.str() << ' '
          << format_double_exact(rg.small_bpb) << ' ' << format_double_exact(rg.benchmark_bpb) << '\n';
    }
    if (!out) fail(Errc::kIo, "cannot write checkpoint " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

class Search {
 public:
  Search(const SearchConfig& cfg, const SearchInputs& inputs) : cfg_(cfg), in_(inputs) {}

  void restore(Checkpoint cp) {
    state_ = std::move(cp);
    std::sort(state_.ranked.begin(), state_.ranked.end(), ranked_before);
    if (state_.ranked.size() > cfg_.top) state_.ranked.resize(cfg_.top);
  }

  Checkpoint& state() { return state_; }

  void run_batch(std::vector<Candidate>& batch) {
    const std::size_t n = batch.size();
    std::vector<Evaluation> ev(n);

    // Stages 1 and 2; duplicates (random mode) are evaluated once.
    std::vector<std::size_t> todo;
    std::vector<std::size_t> alias(n);
    std::unordered_map<std::string, std::size_t> first;
    for (std::size_t i = 0; i < n; ++i) {
      alias[i] = i;
      if (auto it = memo_.find(batch[i].key); it != memo_.end()) {
        ev[i] = it->second;
      } else if (auto [pos, fresh] = first.emplace(batch[i].key, i); !fresh) {
        alias[i] = pos->second;
      } else {
        todo.push_back(i);
      }
    }
    parallel_for(todo.size(), cfg_.threads, [&](std::size_t t) {
      const std::size_t i = todo[t];
      ev[i].parses = parses_all(batch[i].grammar, in_.parsable);
      if (ev[i].parses) ev[i].small = grammar_bpb(batch[i].grammar, in_.small, cfg_.model_kind, cfg_.expansion);
    });
    for (std::size_t i = 0; i < n; ++i) {
      if (alias[i] != i) ev[i] = ev[alias[i]];
    }

    // Threshold from the list as it stood at the start of the batch.
    const bool full = state_.ranked.size() >= cfg_.top;
    const double worst_small = full ? state_.ranked.back().small_bpb : kInf;
    std::vector<char> pass(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      pass[i] = ev[i].parses && std::isfinite(ev[i].small) &&
                (!full || !cfg_.stage2_threshold || ev[i].small <= worst_small);
    }

    todo.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (pass[i] && !ev[i].benchmark && alias[i] == i) todo.push_back(i);
    }
    parallel_for(todo.size(), cfg_.threads, [&](std::size_t t) {
      const std::size_t i = todo[t];
      ev[i].benchmark = grammar_bpb(batch[i].grammar, in_.benchmark, cfg_.model_kind, cfg_.expansion);
    });

    auto& c = state_.counters;
    for (std::size_t i = 0; i < n; ++i) {
      if (alias[i] != i) ev[i] = ev[alias[i]];
      memo_[batch[i].key] = ev[i];
      ++c.generated;
      if (!ev[i].parses) {
        ++c.parse_filtered;
      } else if (!pass[i]) {
        ++c.small_filtered;
      } else {
        ++c.benchmarked;
        if (std::isfinite(*ev[i].benchmark)) insert(batch[i], ev[i]);
      }
    }
  }

 private:
  void insert(const Candidate& cand, const Evaluation& ev) {
    auto& list = state_.ranked;
    for (const auto& rg : list) {
      if (rg.rank == cand.rank && rg.grammar == cand.grammar) return;
    }
    RankedGrammar rg{cand.grammar, cand.rank, ev.small, *ev.benchmark};
    list.insert(std::upper_bound(list.begin(), list.end(), rg, ranked_before), std::move(rg));
    if (list.size() > cfg_.top) list.pop_back();
  }

  const SearchConfig& cfg_;
  const SearchInputs& in_;
  Checkpoint state_;
  std::unordered_map<std::string, Evaluation> memo_;
};

void check_config(const SearchConfig& cfg) {
  if (cfg.top < 1) fail(Errc::kInvalidConfig, "top list size must be at least 1");
  if (cfg.k_min < 1 || cfg.k_min > cfg.k_max) fail(Errc::kInvalidConfig, "bad nonterminal range");
  if (cfg.r_min < 1 || cfg.r_min > cfg.r_max) fail(Errc::kInvalidConfig, "bad rule-count range");
  if (cfg.mode == SearchMode::kRandom && cfg.budget < 1) fail(Errc::kInvalidConfig, "budget must be at least 1");
  if (cfg.batch < 1) fail(Errc::kInvalidConfig, "batch size must be at least 1");
  if (cfg.mode == SearchMode::kRandom) {
    for (std::uint32_t k = cfg.k_min; k <= cfg.k_max; ++k) {
      if (cfg.r_min > universe_size(k)) {
        fail(Errc::kInvalidConfig, "no grammar with k = " + std::to_string(k) + " has " + std::to_string(cfg.r_min) +
                                       " rules");
      }
    }
  }
}

}  // namespace

SearchResult run_search(const SearchConfig& cfg, const SearchInputs& inputs) {
  check_config(cfg);
  Search search(cfg, inputs);
  if (!cfg.checkpoint.empty() && std::filesystem::exists(cfg.checkpoint)) search.restore(read_checkpoint(cfg.checkpoint));
  auto& shards = search.state().shards;
  auto save = [&] {
    if (!cfg.checkpoint.empty()) write_checkpoint(cfg.checkpoint, search.state());
  };

  std::vector<Candidate> batch;
  if (cfg.mode == SearchMode::kExhaustive) {
    for (std::uint32_t k = cfg.k_min; k <= cfg.k_max; ++k) {
      const std::uint64_t r_hi = std::min<std::uint64_t>(cfg.r_max, universe_size(k));
      for (std::uint64_t r = cfg.r_min; r <= r_hi; ++r) {
        const std::string shard = std::to_string(k) + ":" + std::to_string(r);
        auto it = shards.find(shard);
        GrammarEnumerator e(k, r, it == shards.end() ? BigInt(0) : BigInt(it->second));
        while (!e.done()) {
          batch.clear();
          for (; !e.done() && batch.size() < cfg.batch; e.next()) {
            batch.push_back({e.grammar(), e.rank(), grammar_key(k, r, e.rank())});
          }
          search.run_batch(batch);
          shards[shard] = e.done() ? count_grammars(k, r).str() : e.rank().str();
          save();
        }
        if (!shards.count(shard)) {
          shards[shard] = count_grammars(k, r).str();
          save();
        }
      }
    }
  } else {
    auto it = shards.find("random");
    std::uint64_t draw = it == shards.end() ? 0 : std::stoull(it->second);
    while (draw < cfg.budget) {
      batch.clear();
      for (; draw < cfg.budget && batch.size() < cfg.batch; ++draw) {
        std::mt19937_64 rng = draw_rng(cfg.seed, draw);
        const auto k = cfg.k_min + static_cast<std::uint32_t>(uniform_index(rng, cfg.k_max - cfg.k_min + 1));
        const std::uint64_t r_hi = std::min<std::uint64_t>(cfg.r_max, universe_size(k));
        const std::uint64_t r = cfg.r_min + uniform_index(rng, r_hi - cfg.r_min + 1);
        const std::uint64_t u = universe_size(k);
        BigInt rank = uniform_below(binomial(u, r), rng);
        SrfGrammar g = grammar_from_sorted_universe(k, subset_unrank(u, r, rank));
        std::string key = grammar_key(k, r, rank);
        batch.push_back({std::move(g), std::move(rank), std::move(key)});
      }
      search.run_batch(batch);
      shards["random"] = std::to_string(draw);
      save();
    }
  }
  return {search.state().ranked, search.state().counters};
}

std::string format_search_csv(const SearchResult& result) {
  std::ostringstream out;
  out << "k,r,grammar_serialization_hex,small_bpb,benchmark_bpb\n";
  char buf[64];
  for (const auto& rg : result.ranked) {
    out << rg.grammar.nonterminals() << ',' << rg.grammar.size() << ',' << serialize_grammar(rg.grammar).to_hex();
    std::snprintf(buf, sizeof buf, ",%.6f,%.6f\n", rg.small_bpb, rg.benchmark_bpb);
    out << buf;
  }
  const auto& c = result.counters;
  out << "# generated=" << c.generated << ",parse_filtered=" << c.parse_filtered
      << ",small_filtered=" << c.small_filtered << ",benchmarked=" << c.benchmarked << '\n';
  return out.str();
}

}  // namespace srf
