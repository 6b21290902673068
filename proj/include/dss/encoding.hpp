#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace dss::node {

// Byte encoding used on the wire and in the ledger. A temperature byte is
// the reading shifted by +40 so the DHT22 range [-40, 80] maps onto
// [0, 120]; a humidity byte is the integer percentage [0, 100].
inline constexpr int kTempOffset = 40;
inline constexpr std::uint8_t kTempByteMax = 120;
inline constexpr std::uint8_t kHumByteMax = 100;

struct EncodedReading {
    std::uint8_t temp_byte = 0;
    std::uint8_t hum_byte = 0;

    bool operator==(const EncodedReading&) const = default;
};

// Round half away from zero, shift, narrow. Throws std::out_of_range
// outside [-40, 80].
std::uint8_t encode_temp(double temp_c);

// Inverse of encode_temp up to rounding. Throws std::out_of_range for
// bytes above 120.
int decode_temp(std::uint8_t byte);

// Round half away from zero, narrow. Throws std::out_of_range outside
// [0, 100].
std::uint8_t encode_hum(double rh_pct);

int decode_hum(std::uint8_t byte);

inline EncodedReading encode(double temp_c, double rh_pct) {
    return EncodedReading{encode_temp(temp_c), encode_hum(rh_pct)};
}

// Fixed 32-byte transmission word. A word carries up to 32 one-byte
// readings; unused tail bytes are zero.
inline constexpr std::size_t kWordBytes = 32;
inline constexpr std::size_t kMaxReadingsPerWord = 32;

struct PackedWord {
    std::array<std::uint8_t, kWordBytes> bytes{};
    std::size_t count = 0;

    bool operator==(const PackedWord&) const = default;
};

// Throws std::invalid_argument when readings is empty or holds more than 32
// values.
PackedWord pack(std::span<const std::uint8_t> readings);

// Validates the word invariants (1 <= count <= 32, zero tail) and returns
// the leading count bytes. Throws std::invalid_argument on violation.
std::vector<std::uint8_t> unpack(const PackedWord& word);

}  // namespace dss::node
