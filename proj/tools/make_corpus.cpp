// Writes deterministic synthetic RNA datasets (FASTA-like, dot-bracket).
//
//   make_corpus stemloop --count 100 --min 30 --max 150 --seed 7 --prefix rec > corpus.fa
//   make_corpus uniform  --count 200 --min 60 --max 300 --seed 1 > uniform.fa
//   make_corpus parsable --from benchmark.fa > parsable.fa

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <random>
#include <string>

#include "CLI11.hpp"
#include "srf/data.hpp"
#include "srf/error.hpp"
#include "srf/search.hpp"

namespace {

using srf::unit_uniform;

std::size_t uniform_int(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(unit_uniform(rng) * static_cast<double>(hi - lo + 1));
}

// Stem-loop structures: runs of unpaired bases alternating with helices of
// 3-8 pairs, whose interiors are hairpin loops or nested regions.
class StemLoopGenerator {
 public:
  explicit StemLoopGenerator(std::uint64_t seed) : rng_(seed) {}

  srf::RnaRecord record(std::size_t n, std::string id) {
    srf::RnaRecord rec;
    rec.id = std::move(id);
    rec.structure = region(n);
    const auto partner = srf::pair_table(rec.structure);
    rec.sequence.assign(n, 'A');
    for (std::size_t i = 0; i < n; ++i) {
      if (partner[i] < 0) {
        rec.sequence[i] = pick("AAACCGUUUG");
      } else if (static_cast<std::size_t>(partner[i]) > i) {
        static const char* kPairs[] = {"GC", "GC", "GC", "CG", "CG", "CG", "AU", "AU", "UA", "UA", "GU", "UG"};
        const char* p = kPairs[uniform_int(rng_, 0, 11)];
        rec.sequence[i] = p[0];
        rec.sequence[static_cast<std::size_t>(partner[i])] = p[1];
      }
    }
    return rec;
  }

 private:
  char pick(const char* alphabet) {
    const std::string_view a(alphabet);
    return a[uniform_int(rng_, 0, a.size() - 1)];
  }

  std::string region(std::size_t n) {
    std::string out;
    while (out.size() < n) {
      const std::size_t rem = n - out.size();
      if (rem >= 11 && unit_uniform(rng_) < 0.6) {
        out += helix(uniform_int(rng_, 11, std::max<std::size_t>(11, rem * 3 / 4)));
      } else {
        std::size_t run = 1;
        while (unit_uniform(rng_) < 0.6) ++run;
        out.append(std::min(run, rem), '.');
      }
    }
    return out;
  }

  std::string helix(std::size_t m) {
    const std::size_t stem = uniform_int(rng_, 3, std::min<std::size_t>(8, (m - 3) / 2));
    const std::size_t inner = m - 2 * stem;
    std::string body;
    if (inner >= 16 && unit_uniform(rng_) < 0.2) {
      // internal loop closing a shorter helix
      const std::size_t l = uniform_int(rng_, 1, 3);
      body = std::string(l, '.') + helix(inner - l - 2) + "..";
    } else if (inner <= 12) {
      body.assign(inner, '.');
    } else {
      body = region(inner);
    }
    return std::string(stem, '(') + body + std::string(stem, ')');
  }

  std::mt19937_64 rng_;
};

std::string record_id(const std::string& prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%03zu", i);
  return prefix + buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic RNA dataset generator"};
  app.require_subcommand(1);
  std::size_t count = 100, min_len = 30, max_len = 150;
  std::uint64_t seed = 1;
  std::string prefix = "rec", from;
  std::size_t cap = 30, max_sub = 10;

  for (auto* sub : {app.add_subcommand("stemloop", "stem-loop structures with biased bases"),
                    app.add_subcommand("uniform", "uniformly random valid structures and bases")}) {
    sub->add_option("--count", count, "records")->capture_default_str();
    sub->add_option("--min", min_len, "minimum length")->capture_default_str();
    sub->add_option("--max", max_len, "maximum length")->capture_default_str();
    sub->add_option("--seed", seed, "RNG seed")->capture_default_str();
    sub->add_option("--prefix", prefix, "record id prefix")->capture_default_str();
  }
  auto* parsable = app.add_subcommand("parsable", "short balanced substructures of a dataset");
  parsable->add_option("--from", from, "source dataset")->required();
  parsable->add_option("--cap", cap, "maximum structures")->capture_default_str();
  parsable->add_option("--max-length", max_sub, "maximum structure length")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    std::vector<srf::RnaRecord> out;
    if (app.got_subcommand("parsable")) {
      out = srf::build_parsable_set(srf::load_dataset(from).records, max_sub, cap);
    } else if (app.got_subcommand("stemloop")) {
      StemLoopGenerator gen(seed);
      std::mt19937_64 lengths(seed ^ 0x9e3779b97f4a7c15ULL);
      for (std::size_t i = 1; i <= count; ++i) out.push_back(gen.record(uniform_int(lengths, min_len, max_len), record_id(prefix, i)));
    } else {
      std::mt19937_64 rng(seed);
      for (std::size_t i = 1; i <= count; ++i) {
        const std::size_t n = uniform_int(rng, min_len, max_len);
        out.push_back(srf::random_uniform_record(n, rng, record_id(prefix, i)));
      }
    }
    std::cout << srf::format_dataset(out);
  } catch (const srf::Error& e) {
    std::cerr << "make_corpus: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
