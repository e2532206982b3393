#include "synthmix/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>

#include "synthmix/error.hpp"

namespace synthmix {
namespace {

const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"mercer", {"r", "s", "s_prime", "t_f", "t_g", "domain_lo", "domain_hi"}},
      {"experiment",
       {"n", "sigma2", "seed", "seeds", "grid_size", "replicates", "d_gen", "d_shift"}},
      {"grid", {"lambda_lo_exp", "lambda_hi_exp", "lambda_count"}},
  };
  return keys;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

ConfigFile ConfigFile::parse(std::istream& in, const std::string& source) {
  ConfigFile cfg;
  cfg.source_ = source;
  std::string section;
  std::string raw;
  int line_no = 0;
  auto fail = [&](const std::string& what) {
    throw ArgumentError(source + ":" + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, raw)) {
    ++line_no;
    const auto cut = raw.find_first_of("#;");
    const std::string line = trim(std::string_view(raw).substr(0, cut));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("malformed section header '" + line + "'");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!allowed_keys().count(section)) fail("unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value', got '" + line + "'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (section.empty()) fail("key '" + key + "' appears before any section");
    if (!allowed_keys().at(section).count(key)) {
      fail("unknown key '" + key + "' in [" + section + "]");
    }
    if (value.empty()) fail("key '" + key + "' has no value");
    if (!cfg.values_[section].emplace(key, value).second) {
      fail("duplicate key '" + key + "' in [" + section + "]");
    }
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  return parse(in, path.string());
}

std::optional<std::string> ConfigFile::get(const std::string& section,
                                           const std::string& key) const {
  const auto s = values_.find(section);
  if (s == values_.end()) return std::nullopt;
  const auto k = s->second.find(key);
  if (k == s->second.end()) return std::nullopt;
  return k->second;
}

std::optional<double> ConfigFile::get_double(const std::string& section,
                                             const std::string& key) const {
  const auto v = get(section, key);
  if (!v) return std::nullopt;
  return parse_double(*v, key);
}

std::optional<int> ConfigFile::get_int(const std::string& section, const std::string& key) const {
  const auto v = get(section, key);
  if (!v) return std::nullopt;
  return parse_int(*v, key);
}

double parse_double(std::string_view text, std::string_view key) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw ArgumentError(std::string(key) + ": malformed number '" + std::string(text) + "'");
  }
  if (!std::isfinite(v)) throw ArgumentError(std::string(key) + ": must be finite");
  return v;
}

int parse_int(std::string_view text, std::string_view key) {
  const std::string t = trim(text);
  int v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw ArgumentError(std::string(key) + ": malformed integer '" + std::string(text) + "'");
  }
  return v;
}

std::vector<std::uint64_t> parse_seed_list(std::string_view text, std::string_view key) {
  std::string s(text);
  std::replace(s.begin(), s.end(), ',', ' ');
  std::vector<std::uint64_t> seeds;
  std::size_t pos = 0;
  while (pos < s.size()) {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
    if (pos >= s.size()) break;
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data() + pos, s.data() + s.size(), v);
    if (res.ec != std::errc() || (res.ptr != s.data() + s.size() && *res.ptr != ' ')) {
      throw ArgumentError(std::string(key) + ": malformed seed list '" + std::string(text) + "'");
    }
    seeds.push_back(v);
    pos = static_cast<std::size_t>(res.ptr - s.data());
  }
  if (seeds.empty()) throw ArgumentError(std::string(key) + ": empty seed list");
  return seeds;
}

UcurveConfig apply_config(const ConfigFile& file, UcurveConfig base, bool* seeds_given) {
  auto set_d = [&](const char* sec, const char* key, double& dst) {
    if (auto v = file.get_double(sec, key)) dst = *v;
  };
  auto set_i = [&](const char* sec, const char* key, int& dst) {
    if (auto v = file.get_int(sec, key)) dst = *v;
  };
  set_d("mercer", "r", base.r);
  set_d("mercer", "s", base.s);
  set_d("mercer", "s_prime", base.s_prime);
  set_i("mercer", "t_f", base.t_f);
  set_i("mercer", "t_g", base.t_g);
  set_d("mercer", "domain_lo", base.domain_lo);
  set_d("mercer", "domain_hi", base.domain_hi);
  set_i("experiment", "n", base.n);
  set_d("experiment", "sigma2", base.sigma2);
  set_i("experiment", "grid_size", base.grid_size);
  set_d("grid", "lambda_lo_exp", base.lambda_grid.lo_exp);
  set_d("grid", "lambda_hi_exp", base.lambda_grid.hi_exp);
  set_i("grid", "lambda_count", base.lambda_grid.count);

  const auto seed = file.get("experiment", "seed");
  const auto seeds = file.get("experiment", "seeds");
  if (seed && seeds) throw ArgumentError("seed: give either 'seed' or 'seeds', not both");
  if (seed) base.seeds = parse_seed_list(*seed, "seed");
  if (seeds) base.seeds = parse_seed_list(*seeds, "seeds");
  if (seeds_given) *seeds_given = seed || seeds;
  return base;
}

}  // namespace synthmix
