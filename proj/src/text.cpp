#include "dss/text.hpp"

#include <charconv>

#include <fmt/core.h>

#include "dss/errors.hpp"

namespace dss::text {

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

namespace {

template <typename T>
T parse_integral(std::string_view field, int line_no, std::string_view what) {
    T value{};
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        throw ParseError(line_no, fmt::format("bad {}: '{}'", what, field));
    return value;
}

}  // namespace

std::uint64_t parse_u64(std::string_view field, int line_no, std::string_view what) {
    return parse_integral<std::uint64_t>(field, line_no, what);
}

std::int64_t parse_i64(std::string_view field, int line_no, std::string_view what) {
    return parse_integral<std::int64_t>(field, line_no, what);
}

double parse_double(std::string_view field, int line_no, std::string_view what) {
    // gcc 11 ships from_chars for doubles; strtod would accept locale forms.
    double value{};
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        throw ParseError(line_no, fmt::format("bad {}: '{}'", what, field));
    return value;
}

std::map<std::string, std::string, std::less<>> parse_kv(std::string_view payload,
                                                         int line_no) {
    std::map<std::string, std::string, std::less<>> out;
    if (payload.empty()) return out;
    for (std::string_view piece : split(payload, ';')) {
        const std::size_t eq = piece.find('=');
        if (eq == std::string_view::npos || eq == 0)
            throw ParseError(line_no, fmt::format("bad key=value pair: '{}'", piece));
        std::string key(piece.substr(0, eq));
        if (!out.emplace(std::move(key), std::string(piece.substr(eq + 1))).second)
            throw ParseError(line_no,
                             fmt::format("duplicate key '{}'", piece.substr(0, eq)));
    }
    return out;
}

}  // namespace dss::text
