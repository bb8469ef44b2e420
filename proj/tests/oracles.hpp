#pragma once

// Reference implementations used only by the tests. They share no code with
// the library beyond the grammar container itself.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "srf/grammar.hpp"

namespace oracle {

// Every dot-bracket word of length <= max_len derivable from the start
// symbol, mapped to the best log2 probability over all leftmost derivations
// when each nonterminal picks uniformly among its rules.
std::map<std::string, double> derivable_words(const srf::SrfGrammar& g, std::size_t max_len);

// Pascal's triangle; n <= 62.
std::uint64_t binomial(unsigned n, unsigned r);

// Rule universe size by listing every typed rule.
std::uint64_t universe_size(std::uint32_t k);

// All strings over {., (, )} of length n.
std::vector<std::string> all_words(std::size_t n);

// All balanced strings of length n without "()".
std::vector<std::string> all_structures(std::size_t n);

// All strictly increasing r-subsets of [0, u) in colex order, by filtering
// bitmasks sorted on their highest differing element.
std::vector<std::vector<std::uint64_t>> colex_subsets(unsigned u, unsigned r);

}  // namespace oracle
