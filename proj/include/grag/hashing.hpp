#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace grag {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

constexpr std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state = kFnvOffset) {
    for (char c : bytes) {
        state ^= static_cast<std::uint8_t>(c);
        state *= kFnvPrime;
    }
    return state;
}

std::string sha256_hex(std::string_view bytes);
std::string hex64(std::uint64_t value);

} // namespace grag
