#pragma once
// Flat sectioned key-value experiment files:
//
//   [mercer]
//   r = 2
//   s = 0.8
//   [experiment]
//   seeds = 42, 43, 44
//
// '#' and ';' start comments. Unknown sections and keys are rejected.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "synthmix/harness.hpp"

namespace synthmix {

class ConfigFile {
 public:
  static ConfigFile parse(std::istream& in, const std::string& source = "<config>");
  static ConfigFile load(const std::filesystem::path& path);

  std::optional<std::string> get(const std::string& section, const std::string& key) const;
  bool has(const std::string& section, const std::string& key) const {
    return get(section, key).has_value();
  }

  std::optional<double> get_double(const std::string& section, const std::string& key) const;
  std::optional<int> get_int(const std::string& section, const std::string& key) const;

  const std::string& source() const { return source_; }

 private:
  std::string source_;
  std::map<std::string, std::map<std::string, std::string>> values_;
};

/// Strict numeric parsing; the key is named in the ArgumentError.
double parse_double(std::string_view text, std::string_view key);
int parse_int(std::string_view text, std::string_view key);
/// Comma- or space-separated unsigned seeds.
std::vector<std::uint64_t> parse_seed_list(std::string_view text, std::string_view key = "seeds");

/// Overlays file values on `base`. Sets *seeds_given when the file names a
/// seed or seed list.
UcurveConfig apply_config(const ConfigFile& file, UcurveConfig base, bool* seeds_given = nullptr);

}  // namespace synthmix
