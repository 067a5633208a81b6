#include "causal_cart/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "causal_cart/errors.hpp"

namespace ccart {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T convert(const std::string& key, std::string_view text) {
  T out{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, out);
  if (ec != std::errc() || ptr != end)
    throw ConfigError("config key '" + key + "': cannot parse '" + std::string(text) + "'");
  return out;
}

}  // namespace

Config Config::parse(std::string_view text) {
  Config cfg;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    if (!cfg.values_.emplace(key, value).second)
      throw ConfigError("config key '" + key + "' given twice");
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string Config::str(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing required config key '" + key + "'");
  return it->second;
}

double Config::real(const std::string& key) const { return convert<double>(key, str(key)); }

std::int64_t Config::integer(const std::string& key) const {
  return convert<std::int64_t>(key, str(key));
}

std::uint64_t Config::u64(const std::string& key) const {
  return convert<std::uint64_t>(key, str(key));
}

std::size_t Config::count(const std::string& key) const {
  return convert<std::size_t>(key, str(key));
}

std::vector<std::string> Config::list(const std::string& key) const {
  std::vector<std::string> out;
  const std::string v = str(key);
  std::string_view rest(v);
  while (true) {
    const auto comma = rest.find(',');
    const auto item = trim(rest.substr(0, comma));
    if (item.empty()) throw ConfigError("config key '" + key + "': empty list item");
    out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return out;
}

std::vector<double> Config::reals(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : list(key)) out.push_back(convert<double>(key, item));
  return out;
}

std::vector<std::size_t> Config::counts(const std::string& key) const {
  std::vector<std::size_t> out;
  for (const auto& item : list(key)) out.push_back(convert<std::size_t>(key, item));
  return out;
}

void Config::check_keys(const std::vector<std::string>& allowed,
                        const std::vector<std::string>& required) const {
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  std::string unknown;
  for (const auto& [key, value] : values_)
    if (!ok.count(key)) unknown += (unknown.empty() ? "" : ", ") + key;
  if (!unknown.empty()) throw ConfigError("unknown config key(s): " + unknown);
  for (const auto& key : required)
    if (!has(key)) throw ConfigError("missing required config key '" + key + "'");
}

std::string Config::canonical() const {
  std::string out;
  for (const auto& [key, value] : values_) out += key + "=" + value + "\n";
  return out;
}

}  // namespace ccart
