#ifndef RELCLASS_CONFIG_MAP_H_
#define RELCLASS_CONFIG_MAP_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "relclass/model.h"

namespace relclass {

// Throws std::invalid_argument naming the key when missing or malformed.
const std::string& require_key(const ConfigMap& m, const std::string& key);
std::size_t get_size(const ConfigMap& m, const std::string& key);
std::int64_t get_int(const ConfigMap& m, const std::string& key);
std::uint64_t get_u64(const ConfigMap& m, const std::string& key);
double get_double(const ConfigMap& m, const std::string& key);
bool get_bool(const ConfigMap& m, const std::string& key);

std::size_t parse_size(std::string_view s);
std::int64_t parse_int(std::string_view s);
std::uint64_t parse_u64(std::string_view s);
double parse_double(std::string_view s);
bool parse_bool(std::string_view s);
std::vector<std::size_t> parse_size_list(std::string_view s);  // "2,3,4,5"
std::string join_sizes(const std::vector<std::size_t>& v);

// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

// "key = value" lines; '#' starts a comment. Throws std::invalid_argument on
// malformed lines or repeated keys.
ConfigMap parse_key_values(std::string_view text);
std::string format_key_values(const ConfigMap& m);

}  // namespace relclass

#endif  // RELCLASS_CONFIG_MAP_H_
