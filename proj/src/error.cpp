#include "srf/error.hpp"

namespace srf {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::kIndexOutOfRange: return "IndexOutOfRange";
    case Errc::kChainNotDescending: return "ChainNotDescending";
    case Errc::kDuplicateRule: return "DuplicateRule";
    case Errc::kStartSymbolDead: return "StartSymbolDead";
    case Errc::kGrammarSyntax: return "GrammarSyntax";
    case Errc::kProbabilityInvalid: return "ProbabilityInvalid";
    case Errc::kMalformedDerivation: return "MalformedDerivation";
    case Errc::kUnparseable: return "Unparseable";
    case Errc::kUnparseableRecord: return "UnparseableRecord";
    case Errc::kUnknownRule: return "UnknownRule";
    case Errc::kModelMismatch: return "ModelMismatch";
    case Errc::kZeroProbabilityRule: return "ZeroProbabilityRule";
    case Errc::kCorruptStream: return "CorruptStream";
    case Errc::kRuleCountOutOfRange: return "RuleCountOutOfRange";
    case Errc::kMalformedCode: return "MalformedCode";
    case Errc::kRankOutOfRange: return "RankOutOfRange";
    case Errc::kParseError: return "ParseError";
    case Errc::kInvalidRecord: return "InvalidRecord";
    case Errc::kUnbalanced: return "Unbalanced";
    case Errc::kDatasetLoadError: return "DatasetLoadError";
    case Errc::kInvalidConfig: return "InvalidConfig";
    case Errc::kIo: return "Io";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace srf
