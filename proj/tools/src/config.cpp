#include "crossdiff_cli/config.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <crossdiff/errors.hpp>

namespace crossdiff::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

ConfigFile ConfigFile::parse(std::istream& is) {
  ConfigFile cfg;
  std::string section;
  std::string raw;
  int line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3)
        throw ConfigError("line " + std::to_string(line_no) + ": malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      cfg.entries_.try_emplace(section + ".", std::vector<Entry>{});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (section.empty())
      throw ConfigError("line " + std::to_string(line_no) + ": key '" + key + "' appears before any [section]");
    cfg.entries_[section + "." + key].push_back({value, line_no});
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse(in);
}

bool ConfigFile::has(const std::string& key) const {
  const auto it = entries_.find(key);
  return it != entries_.end() && !it->second.empty();
}

bool ConfigFile::has_section(const std::string& section) const {
  const std::string prefix = section + ".";
  const auto it = entries_.lower_bound(prefix);
  return it != entries_.end() && it->first.compare(0, prefix.size(), prefix) == 0;
}

const std::string& ConfigFile::get(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end() || it->second.empty()) throw ConfigError("missing config key '" + key + "'");
  if (it->second.size() > 1)
    throw ConfigError("config key '" + key + "' given more than once (line " +
                      std::to_string(it->second[1].line) + ")");
  return it->second.front().value;
}

std::string ConfigFile::get_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? get(key) : fallback;
}

double ConfigFile::get_double(const std::string& key) const { return parse_double(get(key), key); }

double ConfigFile::get_double_or(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

std::size_t ConfigFile::get_count(const std::string& key) const {
  const std::string& text = get(key);
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw ConfigError("config key '" + key + "': expected a nonnegative integer, got '" + text + "'");
  return v;
}

std::size_t ConfigFile::get_count_or(const std::string& key, std::size_t fallback) const {
  return has(key) ? get_count(key) : fallback;
}

std::vector<double> ConfigFile::get_list(const std::string& key) const { return parse_list(get(key), key); }

const std::vector<ConfigFile::Entry>& ConfigFile::all(const std::string& key) const {
  static const std::vector<Entry> empty;
  const auto it = entries_.find(key);
  return it == entries_.end() ? empty : it->second;
}

void ConfigFile::set_default(const std::string& key, const std::string& value) {
  if (!has(key)) entries_[key].push_back({value, 0});
}

void ConfigFile::require_known(const std::vector<std::string>& known) const {
  for (const auto& [key, values] : entries_) {
    if (key.back() == '.') continue;  // section marker
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError("unknown config key '" + key + "' (line " + std::to_string(values.front().line) + ")");
  }
}

double parse_double(const std::string& text, const std::string& key) {
  // Accept simple fractions such as 1/0.168 alongside plain numbers.
  const auto slash = text.find('/');
  if (slash != std::string::npos)
    return parse_double(trim(text.substr(0, slash)), key) / parse_double(trim(text.substr(slash + 1)), key);
  if (text.empty()) throw ConfigError("config key '" + key + "': empty value");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || errno == ERANGE || !std::isfinite(v))
    throw ConfigError("config key '" + key + "': expected a number, got '" + text + "'");
  return v;
}

std::vector<double> parse_list(const std::string& text, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(trim(item), key));
  if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
  return out;
}

}  // namespace crossdiff::cli
