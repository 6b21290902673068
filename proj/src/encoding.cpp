#include "dss/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/core.h>

namespace dss::node {

std::uint8_t encode_temp(double temp_c) {
    if (!(temp_c >= -40.0 && temp_c <= 80.0))
        throw std::out_of_range(fmt::format("temperature {} outside [-40, 80]", temp_c));
    const double shifted = kTempOffset + std::round(temp_c);
    return static_cast<std::uint8_t>(shifted);
}

int decode_temp(std::uint8_t byte) {
    if (byte > kTempByteMax)
        throw std::out_of_range(fmt::format("temperature byte {} above {}", byte, kTempByteMax));
    return static_cast<int>(byte) - kTempOffset;
}

std::uint8_t encode_hum(double rh_pct) {
    if (!(rh_pct >= 0.0 && rh_pct <= 100.0))
        throw std::out_of_range(fmt::format("humidity {} outside [0, 100]", rh_pct));
    return static_cast<std::uint8_t>(std::round(rh_pct));
}

int decode_hum(std::uint8_t byte) {
    if (byte > kHumByteMax)
        throw std::out_of_range(fmt::format("humidity byte {} above {}", byte, kHumByteMax));
    return static_cast<int>(byte);
}

PackedWord pack(std::span<const std::uint8_t> readings) {
    if (readings.empty())
        throw std::invalid_argument("cannot pack an empty word");
    if (readings.size() > kMaxReadingsPerWord)
        throw std::invalid_argument(
            fmt::format("{} readings exceed the {}-byte word", readings.size(), kWordBytes));
    PackedWord word;
    std::copy(readings.begin(), readings.end(), word.bytes.begin());
    word.count = readings.size();
    return word;
}

std::vector<std::uint8_t> unpack(const PackedWord& word) {
    if (word.count == 0 || word.count > kMaxReadingsPerWord)
        throw std::invalid_argument(fmt::format("word count {} outside [1, 32]", word.count));
    for (std::size_t i = word.count; i < kWordBytes; ++i)
        if (word.bytes[i] != 0)
            throw std::invalid_argument(
                fmt::format("word tail byte {} is non-zero past count {}", i, word.count));
    return std::vector<std::uint8_t>(word.bytes.begin(),
                                     word.bytes.begin() + static_cast<std::ptrdiff_t>(word.count));
}

}  // namespace dss::node
