// srf: command-line front end for SRF grammars, the RNA codec and search.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "srf/codec.hpp"
#include "srf/data.hpp"
#include "srf/error.hpp"
#include "srf/grammar.hpp"
#include "srf/parser.hpp"
#include "srf/probmodel.hpp"
#include "srf/search.hpp"
#include "srf/sizecode.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

struct Globals {
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  bool quiet = false;
};

void note(const Globals& g, const std::string& msg) {
  if (!g.quiet) std::cerr << msg << '\n';
}

std::string fmt(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) srf::fail(srf::Errc::kIo, "cannot write " + path);
  out << text;
}

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) srf::fail(srf::Errc::kIo, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) srf::fail(srf::Errc::kIo, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::string rule_text(const srf::ExpandedRule& r) {
  auto nt = [](srf::NonterminalId a) { return "A" + std::to_string(a); };
  auto base = [](srf::Base b, char any) { return b == srf::Base::kAny ? std::string(1, any) : std::string(1, srf::base_char(b)); };
  const std::string lhs = nt(r.lhs) + " -> ";
  switch (r.kind) {
    case srf::RuleKind::kPairSplit: return lhs + nt(r.first) + " " + nt(r.second);
    case srf::RuleKind::kUnpaired: return lhs + base(r.left_base, 'u');
    case srf::RuleKind::kBond: return lhs + base(r.left_base, '(') + " " + nt(r.first) + " " + base(r.right_base, ')');
    case srf::RuleKind::kChain: return lhs + nt(r.first);
  }
  return lhs;
}

std::string rules_inline(const srf::SrfGrammar& g) {
  std::string out;
  for (const auto& r : g.rules()) out += (out.empty() ? "" : "; ") + srf::to_string(r);
  return out;
}

// "3" or "2-4".
template <typename T>
std::pair<T, T> parse_range(const std::string& s, const char* what) {
  try {
    const auto dash = s.find('-');
    if (dash == std::string::npos) {
      const T v = static_cast<T>(std::stoull(s));
      return {v, v};
    }
    return {static_cast<T>(std::stoull(s.substr(0, dash))), static_cast<T>(std::stoull(s.substr(dash + 1)))};
  } catch (const std::exception&) {
    throw CLI::ValidationError(what, "expected N or N-M, got '" + s + "'");
  }
}

srf::Dataset load_records(const std::string& path, srf::ExpansionMode mode, const Globals& globals) {
  srf::LoadOptions opts;
  opts.pairing = mode == srf::ExpansionMode::kAll16 ? srf::ExpansionMode::kAll16 : srf::ExpansionMode::kCanonical6;
  srf::Dataset ds = srf::load_dataset(path, opts);
  for (const auto& s : ds.skipped) note(globals, "skipped " + s.id + ": " + s.reason + " " + s.detail);
  return ds;
}

struct ModelFlags {
  std::string kind = "adaptive";
  std::string scope = "record";
  std::string mode = "canonical6";
  std::string train;
  std::string counts;
};

void add_model_flags(CLI::App* sub, ModelFlags& f, bool with_kind = true) {
  if (with_kind) {
    sub->add_option("--model", f.kind, "rule-probability model")
        ->check(CLI::IsMember({"adaptive", "static"}))
        ->capture_default_str();
  }
  sub->add_option("--adaptive-scope", f.scope, "adaptive counts reset per record or persist over the dataset")
      ->check(CLI::IsMember({"record", "dataset"}))
      ->capture_default_str();
  sub->add_option("--mode", f.mode, "bond expansion")->check(CLI::IsMember({"canonical6", "all16"}))->capture_default_str();
  sub->add_option("--train", f.train, "training dataset for the static model");
  sub->add_option("--counts", f.counts, "saved static model counts (instead of --train)");
}

std::optional<srf::StaticModel> static_model_from(const ModelFlags& f, const srf::ExpandedGrammar& eg,
                                                  const Globals& globals, bool required) {
  if (!f.counts.empty()) return srf::load_static_model(f.counts, eg);
  if (!f.train.empty()) return srf::train_static(eg, load_records(f.train, eg.mode(), globals).records);
  if (required) throw CLI::ValidationError("--train", "the static model needs --train or --counts");
  return std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic RNA Form grammars: parsing, compression, grammar size and search", "srf"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "help for every subcommand");

  Globals globals;
  bool threads_given = false;
  app.add_option("--seed", globals.seed, "random seed")->capture_default_str();
  app.add_option_function<std::size_t>(
         "--threads", [&](const std::size_t& t) { globals.threads = t, threads_given = true; },
         "worker threads for search and evaluate (default: $SRF_FORGE_THREADS or 1)")
      ->check(CLI::PositiveNumber);
  app.add_flag("--quiet", globals.quiet, "suppress progress and summary messages");

  std::string grammar_path;
  auto* validate = app.add_subcommand("validate", "check a grammar file");
  validate->add_option("grammar", grammar_path, "grammar file")->required();

  auto* size = app.add_subcommand("size", "self-description size in bits");
  size->add_option("grammar", grammar_path, "grammar file")->required();

  bool pack_hex = false;
  auto* pack = app.add_subcommand("pack", "serialize a grammar to its bit code");
  pack->add_option("grammar", grammar_path, "grammar file")->required();
  pack->add_flag("--hex", pack_hex, "print hex (zero-padded) instead of bits");

  std::string code;
  auto* unpack = app.add_subcommand("unpack", "decode a bit code (0/1 string or hex) into a grammar");
  unpack->add_option("code", code, "grammar code")->required();

  std::string expand_mode = "canonical6";
  auto* expand = app.add_subcommand("expand", "list the base-expanded rules");
  expand->add_option("grammar", grammar_path, "grammar file")->required();
  expand->add_option("--mode", expand_mode, "bond expansion")
      ->check(CLI::IsMember({"structure", "canonical6", "all16"}))
      ->capture_default_str();

  auto* prune = app.add_subcommand("prune", "remove dead nonterminals and their rules");
  prune->add_option("grammar", grammar_path, "grammar file")->required();

  ModelFlags mf;
  std::string in_path, out_path;
  bool skip_unparseable = false;
  auto* compress = app.add_subcommand("compress", "compress a dataset into an archive");
  compress->add_option("--grammar", grammar_path, "grammar file")->required();
  add_model_flags(compress, mf);
  compress->add_flag("--skip-unparseable", skip_unparseable, "drop records the grammar cannot derive");
  compress->add_option("input", in_path, "dataset")->required();
  compress->add_option("output", out_path, "archive")->required();

  auto* decompress = app.add_subcommand("decompress", "restore a dataset from an archive");
  decompress->add_option("--grammar", grammar_path, "grammar file")->required();
  decompress->add_option("--train", mf.train, "training dataset used for the static model");
  decompress->add_option("--counts", mf.counts, "saved static model counts");
  decompress->add_option("input", in_path, "archive")->required();
  decompress->add_option("output", out_path, "dataset")->required();

  std::string dataset_path, csv_path, save_counts;
  auto* evaluate = app.add_subcommand("evaluate", "bits per base of a grammar on a dataset");
  evaluate->add_option("--grammar", grammar_path, "grammar file")->required();
  evaluate->add_option("--dataset", dataset_path, "dataset")->required();
  add_model_flags(evaluate, mf);
  evaluate->add_option("--csv", csv_path, "per-record CSV output");
  evaluate->add_option("--save-counts", save_counts, "write the static model counts used");
  evaluate->add_flag("--skip-unparseable", skip_unparseable, "drop records the grammar cannot derive");

  std::string seq;
  auto* predict = app.add_subcommand("predict", "most likely structure for a sequence");
  predict->add_option("--grammar", grammar_path, "grammar file")->required();
  predict->add_option("--train", mf.train, "training dataset for rule probabilities")->required();
  predict->add_option("--mode", mf.mode, "bond expansion")->check(CLI::IsMember({"canonical6", "all16"}))->capture_default_str();
  predict->add_option("--seq", seq, "RNA sequence over ACGU")->required();

  std::uint32_t nts = 1;
  std::uint64_t rules = 1;
  bool count_only = false;
  auto* enumerate = app.add_subcommand("enumerate", "list all grammars with k nonterminals and r rules");
  enumerate->add_option("--nts", nts, "nonterminals k")->required()->check(CLI::PositiveNumber);
  enumerate->add_option("--rules", rules, "rules r")->required()->check(CLI::PositiveNumber);
  enumerate->add_flag("--count-only", count_only, "print only the number of grammars");

  srf::SearchConfig scfg;
  std::string search_mode = "exhaustive", nts_range, rules_range, parsable_path, small_path, bench_path, search_model = "adaptive";
  bool no_threshold = false;
  auto* search = app.add_subcommand("search", "staged search for the best compressing grammars");
  search->add_option("--mode", search_mode, "search mode")->check(CLI::IsMember({"exhaustive", "random"}))->capture_default_str();
  search->add_option("--nts", nts_range, "nonterminals, N or N-M")->required();
  search->add_option("--rules", rules_range, "rules, N or N-M")->required();
  search->add_option("--top", scfg.top, "size m of the top list")->capture_default_str()->check(CLI::PositiveNumber);
  search->add_option("--parsable", parsable_path, "stage 1: structures every grammar must parse")->required();
  search->add_option("--small", small_path, "stage 2 dataset")->required();
  search->add_option("--benchmark", bench_path, "stage 3 dataset")->required();
  search->add_option("--budget", scfg.budget, "grammars drawn in random mode")->capture_default_str()->check(CLI::PositiveNumber);
  search->add_option("--model", search_model, "rule-probability model")
      ->check(CLI::IsMember({"adaptive", "static"}))
      ->capture_default_str();
  search->add_option("--batch", scfg.batch, "grammars per batch")->capture_default_str()->check(CLI::PositiveNumber);
  search->add_flag("--no-threshold", no_threshold, "benchmark every grammar passing stage 1");
  search->add_option("--resume", scfg.checkpoint, "checkpoint file, read if present and updated after every batch");
  search->add_option("--out", out_path, "CSV output (default stdout)");

  double fraction = 0.1;
  auto* sub = app.add_subcommand("subsample", "random subset of a dataset's records");
  sub->add_option("--fraction", fraction, "fraction of records to keep")->required()->check(CLI::Range(0.0, 1.0));
  sub->add_option("input", in_path, "dataset")->required();
  sub->add_option("-o,--out", out_path, "output dataset (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }
  if (!threads_given) {
    if (const char* env = std::getenv("SRF_FORGE_THREADS")) {
      try {
        globals.threads = std::max<std::size_t>(1, std::stoul(env));
      } catch (const std::exception&) {
        std::cerr << "srf: ignoring SRF_FORGE_THREADS='" << env << "'\n";
      }
    }
  }

  try {
    if (*validate) {
      const auto g = srf::load_grammar(grammar_path);
      std::cout << "ok: " << g.nonterminals() << " nonterminals, " << g.size() << " rules\n";
    } else if (*size) {
      const auto g = srf::load_grammar(grammar_path);
      const auto b = srf::grammar_size_bits(g.nonterminals(), g.size());
      std::cout << b.total << '\n';
      if (!globals.quiet) std::cout << b.gamma_bits << '+' << b.rulecount_bits << '+' << b.subset_bits << '\n';
    } else if (*pack) {
      const auto bits = srf::serialize_grammar(srf::load_grammar(grammar_path));
      std::cout << (pack_hex ? bits.to_hex() : bits.to_string()) << '\n';
    } else if (*unpack) {
      srf::Bitstream bits;
      if (code.find_first_not_of("01") == std::string::npos) {
        for (char c : code) bits.push_back(c == '1');
      } else {
        if (code.size() % 2 != 0 || code.find_first_not_of("0123456789abcdefABCDEF") != std::string::npos) {
          srf::fail(srf::Errc::kMalformedCode, "code must be a 0/1 string or even-length hex");
        }
        std::vector<std::uint8_t> bytes;
        for (std::size_t i = 0; i < code.size(); i += 2) bytes.push_back(static_cast<std::uint8_t>(std::stoul(code.substr(i, 2), nullptr, 16)));
        bits = srf::Bitstream(bytes, bytes.size() * 8);
      }
      std::cout << srf::format_grammar(srf::deserialize_grammar(bits));
    } else if (*expand) {
      const srf::ExpandedGrammar eg(srf::load_grammar(grammar_path), srf::expansion_mode_from_string(expand_mode));
      std::cout << "# " << eg.size() << " rules, mode " << expand_mode << '\n';
      for (std::size_t i = 0; i < eg.size(); ++i) std::cout << i << '\t' << rule_text(eg.rules()[i]) << '\n';
    } else if (*prune) {
      const auto g = srf::prune_dead(srf::load_grammar(grammar_path));
      std::cout << srf::format_grammar(g);
      note(globals, "size " + std::to_string(srf::grammar_size_bits(g.nonterminals(), g.size()).total) + " bits");
    } else if (*compress) {
      const srf::ExpandedGrammar eg(srf::load_grammar(grammar_path), srf::expansion_mode_from_string(mf.mode));
      const auto kind = srf::model_kind_from_string(mf.kind);
      const auto model = static_model_from(mf, eg, globals, kind == srf::ModelKind::kStatic);
      auto records = load_records(in_path, eg.mode(), globals).records;
      if (skip_unparseable) {
        const auto uniform = srf::uniform_probabilities(eg);
        srf::ViterbiParser probe(eg, uniform, srf::MatchMode::kJoint);
        std::erase_if(records, [&](const srf::RnaRecord& r) {
          const bool drop = !probe.accepts(srf::joint_word(r.sequence, r.structure));
          if (drop) note(globals, "skipped " + r.id + ": unparseable");
          return drop;
        });
      }
      const auto bytes = srf::compress_archive(records, eg, kind, srf::adaptive_scope_from_string(mf.scope),
                                               model ? &*model : nullptr);
      write_bytes(out_path, bytes);
      std::size_t bases = 0;
      for (const auto& r : records) bases += r.size();
      note(globals, std::to_string(records.size()) + " records, " + std::to_string(bases) + " bases, " +
                        std::to_string(bytes.size()) + " bytes");
    } else if (*decompress) {
      const auto bytes = read_bytes(in_path);
      const auto header = srf::read_archive_header(bytes);
      const srf::ExpandedGrammar eg(srf::load_grammar(grammar_path), header.mode);
      const auto model = static_model_from(mf, eg, globals, header.kind == srf::ModelKind::kStatic);
      const auto records = srf::decompress_archive(bytes, eg, model ? &*model : nullptr);
      srf::write_dataset(records, out_path);
      note(globals, std::to_string(records.size()) + " records");
    } else if (*evaluate) {
      const srf::ExpandedGrammar eg(srf::load_grammar(grammar_path), srf::expansion_mode_from_string(mf.mode));
      const auto records = load_records(dataset_path, eg.mode(), globals).records;
      srf::EvaluateOptions opts;
      opts.kind = srf::model_kind_from_string(mf.kind);
      opts.scope = srf::adaptive_scope_from_string(mf.scope);
      opts.skip_unparseable = skip_unparseable;
      opts.threads = globals.threads;
      std::optional<srf::StaticModel> model;
      if (opts.kind == srf::ModelKind::kStatic) {
        model = static_model_from(mf, eg, globals, false);
        if (!model) model = srf::train_static(eg, records);
        opts.static_model = &*model;
        if (!save_counts.empty()) srf::save_static_model(*model, eg, grammar_path, save_counts);
      }
      const auto report = srf::evaluate(records, eg, opts);
      std::cout << "records " << report.per_record.size() << "\nbases " << report.total_bases << "\nbits "
                << report.total_bits << "\nbits_per_base " << fmt(report.bits_per_base) << "\nideal_bits "
                << fmt(report.ideal_bits, 3) << '\n';
      for (const auto& id : report.skipped) note(globals, "skipped " + id + ": unparseable");
      if (!csv_path.empty()) {
        std::ostringstream csv;
        csv << "id,bases,bits,ideal_bits,bits_per_base\n";
        for (const auto& r : report.per_record) {
          csv << r.id << ',' << r.bases << ',' << r.bits << ',' << fmt(r.ideal_bits, 3) << ','
              << fmt(static_cast<double>(r.bits) / static_cast<double>(r.bases)) << '\n';
        }
        csv << "total," << report.total_bases << ',' << report.total_bits << ',' << fmt(report.ideal_bits, 3) << ','
            << fmt(report.bits_per_base) << '\n';
        write_text(csv_path, csv.str());
      }
    } else if (*predict) {
      const srf::ExpandedGrammar eg(srf::load_grammar(grammar_path), srf::expansion_mode_from_string(mf.mode));
      const auto model = srf::train_static(eg, load_records(mf.train, eg.mode(), globals).records);
      std::cout << srf::predict(eg, model.probabilities(), seq) << '\n';
    } else if (*enumerate) {
      if (count_only) {
        std::cout << srf::count_grammars(nts, rules).str() << '\n';
      } else {
        for (srf::GrammarEnumerator e(nts, rules); !e.done(); e.next()) {
          std::cout << e.rank().str() << '\t' << rules_inline(e.grammar()) << '\n';
        }
      }
    } else if (*search) {
      scfg.mode = search_mode == "random" ? srf::SearchMode::kRandom : srf::SearchMode::kExhaustive;
      std::tie(scfg.k_min, scfg.k_max) = parse_range<std::uint32_t>(nts_range, "--nts");
      std::tie(scfg.r_min, scfg.r_max) = parse_range<std::uint64_t>(rules_range, "--rules");
      scfg.seed = globals.seed;
      scfg.threads = globals.threads;
      scfg.model_kind = srf::model_kind_from_string(search_model);
      scfg.stage2_threshold = !no_threshold;
      srf::SearchInputs inputs;
      try {
        inputs.parsable = srf::load_dataset(parsable_path).records;
        inputs.small = load_records(small_path, scfg.expansion, globals).records;
        inputs.benchmark = load_records(bench_path, scfg.expansion, globals).records;
      } catch (const srf::Error& e) {
        srf::fail(srf::Errc::kDatasetLoadError, e.what());
      }
      const auto result = srf::run_search(scfg, inputs);
      write_text(out_path, srf::format_search_csv(result));
      const auto& c = result.counters;
      note(globals, "generated " + std::to_string(c.generated) + ", parse-filtered " + std::to_string(c.parse_filtered) +
                        ", small-filtered " + std::to_string(c.small_filtered) + ", benchmarked " +
                        std::to_string(c.benchmarked));
    } else if (*sub) {
      const auto ds = srf::load_dataset(in_path);
      const auto out = srf::subsample(ds.records, fraction, globals.seed);
      write_text(out_path, srf::format_dataset(out));
      note(globals, std::to_string(out.size()) + " of " + std::to_string(ds.records.size()) + " records");
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "srf: " << e.what() << '\n';
    return kExitUsage;
  } catch (const srf::Error& e) {
    std::cerr << "srf: " << e.what() << '\n';
    return e.code() == srf::Errc::kMalformedDerivation ? kExitInternal : kExitData;
  } catch (const std::exception& e) {
    std::cerr << "srf: internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return 0;
}
