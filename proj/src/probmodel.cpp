#include "srf/probmodel.hpp"

#include <fstream>
#include <sstream>

#include "srf/error.hpp"
#include "srf/parser.hpp"

namespace srf {

RuleCounts::RuleCounts(const ExpandedGrammar& g, std::vector<std::uint64_t> counts)
    : counts_(std::move(counts)), totals_(g.nonterminals(), 0), by_lhs_(g.nonterminals()) {
  if (counts_.size() != g.size()) {
    fail(Errc::kModelMismatch,
         "model has " + std::to_string(counts_.size()) + " counts, grammar has " + std::to_string(g.size()) + " rules");
  }
  lhs_of_.reserve(g.size());
  for (std::uint32_t id = 0; id < g.size(); ++id) {
    const NonterminalId lhs = g.rules()[id].lhs;
    lhs_of_.push_back(lhs);
    if (counts_[id] == 0) fail(Errc::kZeroProbabilityRule, "rule " + std::to_string(id) + " has count 0");
    totals_[lhs] += counts_[id];
  }
  for (NonterminalId a = 0; a < g.nonterminals(); ++a) by_lhs_[a] = g.rules_of(a);
}

double RuleCounts::probability(std::uint32_t rule) const {
  return static_cast<double>(counts_[rule]) / static_cast<double>(totals_[lhs_of_[rule]]);
}

std::vector<double> RuleCounts::distribution(NonterminalId lhs) const {
  std::vector<double> out;
  out.reserve(by_lhs_[lhs].size());
  for (std::uint32_t id : by_lhs_[lhs]) out.push_back(probability(id));
  return out;
}

std::vector<double> RuleCounts::probabilities() const {
  std::vector<double> out(counts_.size());
  for (std::uint32_t id = 0; id < counts_.size(); ++id) out[id] = probability(id);
  return out;
}

AdaptiveModel::AdaptiveModel(const ExpandedGrammar& g) : RuleCounts(g, std::vector<std::uint64_t>(g.size(), 1)) {}

void AdaptiveModel::adaptive_update(std::uint32_t rule) {
  if (rule >= counts_.size()) fail(Errc::kUnknownRule, "rule id " + std::to_string(rule));
  ++counts_[rule];
  ++totals_[lhs_of_[rule]];
}

void AdaptiveModel::reset() {
  std::fill(counts_.begin(), counts_.end(), 1);
  std::fill(totals_.begin(), totals_.end(), 0);
  for (std::uint32_t id = 0; id < counts_.size(); ++id) ++totals_[lhs_of_[id]];
}

StaticModel train_static(const ExpandedGrammar& g, const std::vector<RnaRecord>& dataset) {
  std::vector<std::uint64_t> counts(g.size(), 1);
  const auto uniform = uniform_probabilities(g);
  ViterbiParser parser(g, uniform, MatchMode::kJoint);
  for (const auto& rec : dataset) {
    const Word w = joint_word(rec.sequence, rec.structure);
    auto result = parser.parse(w);
    if (!result) fail(Errc::kUnparseableRecord, "record '" + rec.id + "'");
    for (std::uint32_t id : result->derivation.rule_ids) ++counts[id];
  }
  return StaticModel(g, std::move(counts));
}

std::string format_static_model(const StaticModel& m, const ExpandedGrammar& g, const std::string& grammar_name) {
  std::ostringstream out;
  out << "# srf static rule-count model\n";
  out << "grammar " << grammar_name << "\n";
  out << "mode " << to_string(g.mode()) << "\n";
  out << "rules " << m.size() << "\n";
  for (std::uint32_t id = 0; id < m.size(); ++id) out << id << " " << m.count(id) << "\n";
  return out.str();
}

void save_static_model(const StaticModel& m, const ExpandedGrammar& g, const std::string& grammar_name,
                       const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::kIo, "cannot write " + path);
  out << format_static_model(m, g, grammar_name);
}

StaticModel load_static_model(const std::string& path, const ExpandedGrammar& g) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::kIo, "cannot open model " + path);
  std::string line;
  std::vector<std::uint64_t> counts;
  std::size_t declared = 0;
  bool have_rules = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "grammar") continue;
    if (key == "mode") {
      std::string mode;
      ls >> mode;
      if (mode != to_string(g.mode())) fail(Errc::kModelMismatch, path + ": model mode " + mode);
      continue;
    }
    if (key == "rules") {
      ls >> declared;
      have_rules = true;
      if (declared != g.size()) {
        fail(Errc::kModelMismatch,
             path + ": model has " + std::to_string(declared) + " rules, grammar has " + std::to_string(g.size()));
      }
      counts.assign(declared, 0);
      continue;
    }
    if (!have_rules) fail(Errc::kParseError, path + ": count line before 'rules' header");
    std::uint64_t id = 0, count = 0;
    try {
      id = std::stoull(key);
    } catch (const std::exception&) {
      fail(Errc::kParseError, path + ": bad line '" + line + "'");
    }
    if (!(ls >> count) || id >= counts.size()) fail(Errc::kParseError, path + ": bad line '" + line + "'");
    counts[id] = count;
  }
  if (!have_rules) fail(Errc::kParseError, path + ": missing 'rules' header");
  return StaticModel(g, std::move(counts));
}

}  // namespace srf
