#include "srf/data.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>

#include "srf/error.hpp"

namespace srf {

std::size_t Dataset::total_bases() const {
  std::size_t n = 0;
  for (const auto& r : records) n += r.size();
  return n;
}

bool is_balanced(std::string_view structure) {
  long depth = 0;
  for (char c : structure) {
    if (c == '(') ++depth;
    if (c == ')' && --depth < 0) return false;
  }
  return depth == 0;
}

std::vector<int> pair_table(std::string_view structure) {
  std::vector<int> partner(structure.size(), -1);
  std::vector<int> open;
  for (std::size_t i = 0; i < structure.size(); ++i) {
    const char c = structure[i];
    if (c == '(') {
      open.push_back(static_cast<int>(i));
    } else if (c == ')') {
      if (open.empty()) fail(Errc::kUnbalanced, "unmatched ')' at position " + std::to_string(i));
      const int j = open.back();
      open.pop_back();
      partner[i] = j;
      partner[static_cast<std::size_t>(j)] = static_cast<int>(i);
    }
  }
  if (!open.empty()) fail(Errc::kUnbalanced, "unmatched '(' at position " + std::to_string(open.back()));
  return partner;
}

std::string structure_from_pairs(const std::vector<int>& partner) {
  std::string s(partner.size(), '.');
  for (std::size_t i = 0; i < partner.size(); ++i) {
    if (partner[i] < 0) continue;
    s[i] = static_cast<std::size_t>(partner[i]) > i ? '(' : ')';
  }
  return s;
}

std::optional<SkippedRecord> check_record(const RnaRecord& rec, ExpansionMode pairing) {
  auto reject = [&](const char* reason, std::string detail) {
    return std::optional<SkippedRecord>(SkippedRecord{rec.id, reason, std::move(detail)});
  };
  if (rec.sequence.size() != rec.structure.size()) {
    return reject("LengthMismatch", std::to_string(rec.sequence.size()) + " bases vs " +
                                        std::to_string(rec.structure.size()) + " structure symbols");
  }
  if (rec.sequence.empty()) return reject("LengthMismatch", "empty record");
  for (std::size_t i = 0; i < rec.structure.size(); ++i) {
    const char c = rec.structure[i];
    if (c != '.' && c != '(' && c != ')') {
      return reject("BadStructureChar", std::string("'") + c + "' at position " + std::to_string(i));
    }
  }
  for (std::size_t i = 0; i < rec.sequence.size(); ++i) {
    if (base_from_char(rec.sequence[i]) == Base::kAny || rec.sequence[i] == 'T') {
      return reject("NonACGU", std::string("'") + rec.sequence[i] + "' at position " + std::to_string(i));
    }
  }
  if (!is_balanced(rec.structure)) return reject("Unbalanced", "");
  if (auto p = rec.structure.find("()"); p != std::string::npos) {
    return reject("EmptyHairpin", "at position " + std::to_string(p));
  }
  if (pairing == ExpansionMode::kCanonical6) {
    const auto partner = pair_table(rec.structure);
    for (std::size_t i = 0; i < partner.size(); ++i) {
      const int j = partner[i];
      if (j > static_cast<int>(i) &&
          !is_canonical_pair(base_from_char(rec.sequence[i]), base_from_char(rec.sequence[static_cast<std::size_t>(j)]))) {
        return reject("NonCanonicalPair", std::string(1, rec.sequence[i]) + rec.sequence[static_cast<std::size_t>(j)] +
                                              " at " + std::to_string(i) + "/" + std::to_string(j));
      }
    }
  }
  return std::nullopt;
}

namespace {

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(pos, end - pos));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    pos = end + 1;
  }
  return lines;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

bool is_structure_line(const std::string& s) {
  return !s.empty() && !std::isalpha(static_cast<unsigned char>(s[0]));
}

std::string normalize_sequence(std::string s) {
  for (char& c : s) {
    c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (c == 'T') c = 'U';
  }
  return s;
}

}  // namespace

Dataset parse_dataset(std::string_view text, const std::string& source, const LoadOptions& options) {
  Dataset ds;
  ds.source = source;
  const auto lines = split_lines(text);

  auto accept = [&](RnaRecord rec) {
    rec.sequence = normalize_sequence(std::move(rec.sequence));
    if (auto bad = check_record(rec, options.pairing)) {
      if (options.on_invalid == OnInvalid::kFail) {
        fail(Errc::kInvalidRecord, source + ": record '" + rec.id + "': " + bad->reason + " " + bad->detail);
      }
      ds.skipped.push_back(std::move(*bad));
      return;
    }
    ds.records.push_back(std::move(rec));
  };

  const bool headed = std::any_of(lines.begin(), lines.end(), [](const std::string& l) {
    return !trim(l).empty() && trim(l)[0] == '>';
  });

  if (!headed) {
    std::vector<std::pair<std::size_t, std::string>> body;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (auto t = trim(lines[i]); !t.empty()) body.emplace_back(i + 1, t);
    }
    if (body.size() % 2 != 0) {
      fail(Errc::kParseError, source + ": line " + std::to_string(body.back().first) + ": sequence without structure");
    }
    for (std::size_t i = 0; i < body.size(); i += 2) {
      accept({"record" + std::to_string(i / 2 + 1), body[i].second, body[i + 1].second});
    }
    return ds;
  }

  std::size_t i = 0;
  while (i < lines.size()) {
    const std::string line = trim(lines[i]);
    if (line.empty()) {
      ++i;
      continue;
    }
    if (line[0] != '>') {
      fail(Errc::kParseError, source + ": line " + std::to_string(i + 1) + ": expected '>' header");
    }
    const std::size_t header_line = i + 1;
    RnaRecord rec;
    rec.id = trim(line.substr(1));
    ++i;
    while (i < lines.size()) {
      const std::string l = trim(lines[i]);
      if (!l.empty() && l[0] == '>') break;
      if (!l.empty()) {
        if (is_structure_line(l)) {
          rec.structure += l;
        } else if (!rec.structure.empty()) {
          fail(Errc::kParseError, source + ": line " + std::to_string(i + 1) + ": sequence after structure");
        } else {
          rec.sequence += l;
        }
      }
      ++i;
    }
    if (rec.sequence.empty() || rec.structure.empty()) {
      fail(Errc::kParseError,
           source + ": line " + std::to_string(header_line) + ": record '" + rec.id + "' lacks sequence or structure");
    }
    accept(std::move(rec));
  }
  return ds;
}

Dataset load_dataset(const std::string& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::kDatasetLoadError, "cannot open dataset " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_dataset(ss.str(), path, options);
}

std::string format_dataset(const std::vector<RnaRecord>& records) {
  std::string out;
  for (const auto& r : records) out += ">" + r.id + "\n" + r.sequence + "\n" + r.structure + "\n";
  return out;
}

void write_dataset(const std::vector<RnaRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::kIo, "cannot write " + path);
  out << format_dataset(records);
}

void write_filter_log(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::kIo, "cannot write " + path);
  out << "# source " << dataset.source << "\n";
  out << "# loaded " << dataset.records.size() << " skipped " << dataset.skipped.size() << "\n";
  for (const auto& s : dataset.skipped) out << s.id << "\t" << s.reason << "\t" << s.detail << "\n";
}

std::vector<double> count_structures(std::size_t n) {
  // s[m]: first position unpaired, or paired with p >= 2 around a non-empty inside.
  std::vector<double> s(n + 1, 0.0);
  s[0] = 1.0;
  for (std::size_t m = 1; m <= n; ++m) {
    double v = s[m - 1];
    for (std::size_t p = 2; p < m; ++p) v += s[p - 1] * s[m - p - 1];
    s[m] = v;
  }
  return s;
}

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

RnaRecord random_uniform_record(std::size_t n, std::mt19937_64& rng, std::string id) {
  static constexpr std::array<char, 4> kBases{'A', 'C', 'G', 'U'};
  static constexpr std::array<std::pair<char, char>, 6> kPairs{
      {{'A', 'U'}, {'C', 'G'}, {'G', 'C'}, {'G', 'U'}, {'U', 'A'}, {'U', 'G'}}};
  const auto counts = count_structures(n);
  RnaRecord rec;
  rec.id = std::move(id);
  rec.sequence.assign(n, 'A');
  rec.structure.assign(n, '.');
  std::vector<std::pair<std::size_t, std::size_t>> todo{{0, n}};  // [begin, begin+len)
  while (!todo.empty()) {
    auto [b, m] = todo.back();
    todo.pop_back();
    if (m == 0) continue;
    double x = unit_uniform(rng) * counts[m];
    x -= counts[m - 1];
    if (x < 0.0) {
      rec.sequence[b] = kBases[rng() % 4];
      todo.emplace_back(b + 1, m - 1);
      continue;
    }
    std::size_t p = 2;
    for (; p + 1 < m; ++p) {
      x -= counts[p - 1] * counts[m - p - 1];
      if (x < 0.0) break;
    }
    const auto [l, r] = kPairs[rng() % 6];
    rec.structure[b] = '(';
    rec.structure[b + p] = ')';
    rec.sequence[b] = l;
    rec.sequence[b + p] = r;
    todo.emplace_back(b + 1, p - 1);
    todo.emplace_back(b + p + 1, m - p - 1);
  }
  return rec;
}

}  // namespace srf
