#pragma once

#include "bandtaper/types.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace bandtaper {

/**
 * Flat key-value configuration with [section] headers:
 *
 *   # comment
 *   [truth]
 *   p = 200
 *   alphas = 0.1, 0.3
 *
 * Keys are addressed as "section.key". Environment variables named
 * BANDTAPER_<SECTION>_<KEY> (upper case, '-' and '.' mapped to '_') override
 * file values. Integer lists accept "lo:hi" ranges.
 */
class Config {
 public:
  Config() = default;

  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  /// Apply BANDTAPER_* environment overrides to known keys; call after load.
  void apply_env_overrides();

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& def) const;
  std::int64_t get_int(const std::string& key) const;
  std::int64_t get_int(const std::string& key, std::int64_t def) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t def) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double def) const;
  bool get_bool(const std::string& key, bool def) const;
  std::vector<std::int64_t> get_int_list(const std::string& key) const;
  std::vector<double> get_double_list(const std::string& key) const;
  std::vector<std::string> get_string_list(const std::string& key) const;

  void set(const std::string& key, const std::string& value);

  /// Resolved entries in file order (for the run manifest).
  const std::vector<std::pair<std::string, std::string>>& entries() const {
    return entries_;
  }

 private:
  std::string* find(const std::string& key);
  const std::string* find(const std::string& key) const;
  std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace bandtaper
