#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace aksvd {

/// Flat `key = value` settings with dotted keys (kernel.gamma). Lines starting
/// with '#' are comments. Dumps are sorted by key so manifests diff cleanly.
class Config {
 public:
  static Config parse(std::string_view text, const std::string& origin = "<config>");
  static Config load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void erase(const std::string& key) { values_.erase(key); }

  std::optional<std::string> find(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  std::size_t get_size(const std::string& key, std::size_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Comma-separated reals.
  std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) const;
  std::vector<std::string> get_list(const std::string& key, std::vector<std::string> fallback) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  std::string dump() const;

  /// Applies AKSVD_SECTION_KEY variables: each known key maps to the upper-cased
  /// name with '.' replaced by '_' (kernel.gamma ← AKSVD_KERNEL_GAMMA).
  void apply_env(const std::vector<std::string>& known_keys);

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace aksvd
