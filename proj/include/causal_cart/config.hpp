#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace ccart {

/// Flat `key = value` configuration. `#` starts a comment; blank lines are
/// ignored; repeated keys are an error. Values are kept as strings and
/// converted on access, so every conversion failure names its key.
class Config {
 public:
  static Config parse(std::string_view text);
  static Config load(const std::string& path);

  [[nodiscard]] bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

  [[nodiscard]] std::string str(const std::string& key) const;
  [[nodiscard]] double real(const std::string& key) const;
  [[nodiscard]] std::int64_t integer(const std::string& key) const;
  [[nodiscard]] std::uint64_t u64(const std::string& key) const;
  [[nodiscard]] std::size_t count(const std::string& key) const;  // non-negative integer
  [[nodiscard]] std::vector<std::string> list(const std::string& key) const;
  [[nodiscard]] std::vector<double> reals(const std::string& key) const;
  [[nodiscard]] std::vector<std::size_t> counts(const std::string& key) const;

  // ConfigError listing every key outside `allowed`, or naming the first
  // entry of `required` that is absent.
  void check_keys(const std::vector<std::string>& allowed,
                  const std::vector<std::string>& required) const;

  // Canonical "key=value\n" rendering in key order, used for hashing.
  [[nodiscard]] std::string canonical() const;

  [[nodiscard]] const std::map<std::string, std::string>& values() const noexcept {
    return values_;
  }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace ccart
