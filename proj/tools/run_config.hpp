#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace gsn::cli {

/// One documented setting.
struct Key {
  std::string name;
  std::string default_value;
  std::string help;
};

/// Every setting the commands understand, with its default.
const std::vector<Key>& known_keys();

/// Flat key=value settings: defaults, then the config file, then overrides.
/// Lines are `key = value`; `#` starts a comment. Unknown keys are errors.
class RunConfig {
 public:
  RunConfig();

  void load_file(const std::filesystem::path& path);
  void set(const std::string& key, const std::string& value);
  /// Parses `key=value`.
  void set_assignment(const std::string& assignment);

  const std::string& get(const std::string& key) const;
  bool has_value(const std::string& key) const { return !get(key).empty(); }
  double real(const std::string& key) const;
  long long integer(const std::string& key) const;
  std::uint64_t unsigned_integer(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<long long> integer_list(const std::string& key) const;

  /// All settings, one `key = value` per line in key order.
  std::string resolved() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace gsn::cli
