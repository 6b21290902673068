#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace dss::text {

// Splits on every separator; n separators yield n+1 pieces.
std::vector<std::string_view> split(std::string_view s, char sep);

// Strict numeric parsing: the whole field must be consumed. Each throws
// dss::ParseError carrying line_no on failure.
std::uint64_t parse_u64(std::string_view field, int line_no, std::string_view what);
std::int64_t parse_i64(std::string_view field, int line_no, std::string_view what);
double parse_double(std::string_view field, int line_no, std::string_view what);

// Parses "k1=v1;k2=v2" into a map. Duplicate keys throw.
std::map<std::string, std::string, std::less<>> parse_kv(std::string_view payload,
                                                         int line_no);

}  // namespace dss::text
