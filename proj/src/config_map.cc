#include "relclass/config_map.h"

#include <cctype>
#include <charconv>
#include <stdexcept>

namespace relclass {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view s, const char* what) {
  s = trim(s);
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("expected " + std::string(what) + ", got '" + std::string(s) +
                                "'");
  }
  return v;
}

template <typename F>
auto with_key(const ConfigMap& m, const std::string& key, F parse) {
  const std::string& v = require_key(m, key);
  try {
    return parse(v);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument("config key '" + key + "': " + e.what());
  }
}

}  // namespace

const std::string& require_key(const ConfigMap& m, const std::string& key) {
  auto it = m.find(key);
  if (it == m.end()) throw std::invalid_argument("missing config key '" + key + "'");
  return it->second;
}

std::size_t parse_size(std::string_view s) { return parse_number<std::size_t>(s, "a count"); }
std::int64_t parse_int(std::string_view s) { return parse_number<std::int64_t>(s, "an integer"); }
std::uint64_t parse_u64(std::string_view s) {
  return parse_number<std::uint64_t>(s, "a non-negative integer");
}
double parse_double(std::string_view s) { return parse_number<double>(s, "a number"); }

bool parse_bool(std::string_view s) {
  s = trim(s);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw std::invalid_argument("expected a boolean, got '" + std::string(s) + "'");
}

std::vector<std::size_t> parse_size_list(std::string_view s) {
  std::vector<std::size_t> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t comma = s.find(',', start);
    if (comma == std::string_view::npos) comma = s.size();
    out.push_back(parse_size(s.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

std::string join_sizes(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

std::size_t get_size(const ConfigMap& m, const std::string& key) {
  return with_key(m, key, [](const std::string& v) { return parse_size(v); });
}
std::int64_t get_int(const ConfigMap& m, const std::string& key) {
  return with_key(m, key, [](const std::string& v) { return parse_int(v); });
}
std::uint64_t get_u64(const ConfigMap& m, const std::string& key) {
  return with_key(m, key, [](const std::string& v) { return parse_u64(v); });
}
double get_double(const ConfigMap& m, const std::string& key) {
  return with_key(m, key, [](const std::string& v) { return parse_double(v); });
}
bool get_bool(const ConfigMap& m, const std::string& key) {
  return with_key(m, key, [](const std::string& v) { return parse_bool(v); });
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

ConfigMap parse_key_values(std::string_view text) {
  ConfigMap m;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(start, nl - start);
    start = nl + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw std::invalid_argument("line " + std::to_string(line_no) + ": empty key");
    if (!m.emplace(key, std::move(value)).second) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": repeated key '" + key +
                                  "'");
    }
  }
  return m;
}

std::string format_key_values(const ConfigMap& m) {
  std::string out;
  for (const auto& [k, v] : m) {
    out += k;
    out += " = ";
    out += v;
    out += '\n';
  }
  return out;
}

}  // namespace relclass
