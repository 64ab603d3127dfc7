#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace infodyn {

inline constexpr std::string_view version = "0.1.0";

/// 64-bit FNV-1a.
[[nodiscard]] constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace infodyn
