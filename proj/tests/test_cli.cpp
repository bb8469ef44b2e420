#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "test_util.hpp"

namespace {

struct Run {
  int status = -1;
  std::string out;
};

// Runs the CLI from the source directory; stderr is discarded.
Run srf_cli(const std::string& args) {
  const std::string cmd = "cd '" SRF_SOURCE_DIR "' && '" SRF_CLI "' " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int st = pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string tmp(const std::string& name) { return (std::filesystem::temp_directory_path() / name).string(); }

// Compares against tests/snapshots/<name>; SRF_UPDATE_SNAPSHOTS=1 rewrites it.
void check_snapshot(const std::string& name, const std::string& actual) {
  const auto path = source_path("tests/snapshots/" + name);
  if (std::getenv("SRF_UPDATE_SNAPSHOTS")) {
    std::filesystem::create_directories(std::filesystem::path(path).parent_path());
    std::ofstream(path, std::ios::binary) << actual;
  }
  CHECK_MESSAGE(std::filesystem::exists(path), "missing snapshot " << path);
  CHECK(slurp(path) == actual);
}

}  // namespace

TEST_CASE("help output") {
  const auto top = srf_cli("--help");
  CHECK(top.status == 0);
  check_snapshot("help.txt", top.out);
  for (const char* sub : {"validate", "size", "pack", "unpack", "expand", "prune", "compress", "decompress", "evaluate",
                          "predict", "enumerate", "search", "subsample"}) {
    CAPTURE(sub);
    const auto r = srf_cli(std::string(sub) + " --help");
    CHECK(r.status == 0);
    check_snapshot(std::string("help_") + sub + ".txt", r.out);
  }
}

TEST_CASE("grammar commands") {
  CHECK(srf_cli("size grammars/g_l.txt").out == "18\n3+4+11\n");
  CHECK(srf_cli("--quiet size grammars/g_l.txt").out == "18\n");
  CHECK(srf_cli("size grammars/grammar_1nt.txt").out.rfind("3\n", 0) == 0);
  CHECK(srf_cli("validate grammars/g_l.txt").out == "ok: 2 nonterminals, 4 rules\n");

  const auto bits = srf_cli("pack grammars/g_l.txt");
  REQUIRE(bits.status == 0);
  CHECK(bits.out.size() == 19);  // 18 bits and a newline
  const auto back = srf_cli("unpack " + bits.out.substr(0, 18));
  CHECK(back.status == 0);
  CHECK(back.out == srf_cli("prune grammars/g_l.txt").out);
  const auto hex = srf_cli("pack --hex grammars/g_l.txt");
  CHECK(srf_cli("unpack " + hex.out.substr(0, hex.out.size() - 1)).out == back.out);

  const auto pruned = srf_cli("--quiet prune grammars/g_dagger_6_10.txt");
  CHECK(pruned.status == 0);
  CHECK(pruned.out.find("nts: 4") != std::string::npos);

  CHECK(srf_cli("enumerate --nts 2 --rules 7 --count-only").out == "6435\n");
  CHECK(srf_cli("enumerate --nts 3 --rules 3 --count-only").out == "11480\n");
  const auto listing = srf_cli("enumerate --nts 1 --rules 2");
  CHECK(std::count(listing.out.begin(), listing.out.end(), '\n') == 3);
  CHECK(listing.out.rfind("0\t", 0) == 0);
}

TEST_CASE("compress and decompress") {
  const auto archive = tmp("srf_cli_test.srf");
  const auto restored = tmp("srf_cli_test.fa");
  for (const char* model : {"--model adaptive --adaptive-scope record", "--model adaptive --adaptive-scope dataset",
                            "--model static --train data/benchmark.fa"}) {
    CAPTURE(model);
    const std::string m = model;
    const std::string train = m.find("static") != std::string::npos ? " --train data/benchmark.fa" : "";
    REQUIRE(srf_cli("--quiet compress --grammar grammars/g_l.txt " + m + " data/corpus.fa " + archive).status == 0);
    REQUIRE(srf_cli("--quiet decompress --grammar grammars/g_l.txt" + train + " " + archive + " " + restored).status ==
            0);
    CHECK(slurp(restored) == slurp(source_path("data/corpus.fa")));
  }
  std::remove(archive.c_str());
  std::remove(restored.c_str());
}

TEST_CASE("exit codes") {
  CHECK(srf_cli("").status == 1);
  CHECK(srf_cli("frobnicate").status == 1);
  CHECK(srf_cli("size").status == 1);
  CHECK(srf_cli("enumerate --nts 0 --rules 1").status == 1);
  CHECK(srf_cli("size /nonexistent/grammar.txt").status == 2);
  CHECK(srf_cli("enumerate --nts 1 --rules 9 --count-only").out == "0\n");
  CHECK(srf_cli("enumerate --nts 1 --rules 9").status == 2);
  CHECK(srf_cli("unpack 0101").status == 2);
  CHECK(srf_cli("evaluate --grammar grammars/g_l.txt --dataset /nonexistent.fa").status == 2);
  CHECK(srf_cli("decompress --grammar grammars/g_l.txt data/corpus.fa " + tmp("srf_cli_bad.fa")).status == 2);
}

TEST_CASE("evaluate and search are deterministic") {
  const std::string eval = "evaluate --grammar grammars/g_l.txt --dataset data/corpus.fa";
  const auto a = srf_cli(eval);
  CHECK(a.status == 0);
  CHECK(a.out.find("bits_per_base") != std::string::npos);
  CHECK(srf_cli("--threads 3 " + eval).out == a.out);

  const std::string search =
      "search --mode random --nts 1-2 --rules 3-4 --budget 200 --top 3 --batch 32 --parsable data/parsable.fa "
      "--small data/hairpin62.fa --benchmark data/hairpin62.fa";
  const auto s1 = srf_cli("--quiet --seed 4 --threads 1 " + search);
  const auto s2 = srf_cli("--quiet --seed 4 --threads 4 " + search);
  CHECK(s1.status == 0);
  CHECK(s1.out == s2.out);
  CHECK(s1.out.find("# generated=200,") != std::string::npos);
  CHECK(srf_cli("--quiet --seed 5 " + search).out != s1.out);
}
