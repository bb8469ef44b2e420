#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace srf {

enum class Errc {
  // grammar-core
  kIndexOutOfRange,
  kChainNotDescending,
  kDuplicateRule,
  kStartSymbolDead,
  kGrammarSyntax,
  // parser
  kProbabilityInvalid,
  kMalformedDerivation,
  kUnparseable,
  // probmodel
  kUnparseableRecord,
  kUnknownRule,
  kModelMismatch,
  // codec
  kZeroProbabilityRule,
  kCorruptStream,
  // sizecode
  kRuleCountOutOfRange,
  kMalformedCode,
  kRankOutOfRange,
  // data
  kParseError,
  kInvalidRecord,
  kUnbalanced,
  kDatasetLoadError,
  // search
  kInvalidConfig,
  kIo,
};

std::string_view errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] void fail(Errc code, const std::string& what);

}  // namespace srf
