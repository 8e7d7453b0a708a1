#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace roomforge {

using Digest = std::array<std::uint8_t, 32>;

Digest sha256(std::string_view bytes);
std::string sha256_hex(std::string_view bytes);
std::string to_hex(const Digest& digest);

// Reads `count` bytes of the digest starting at `offset` as a big-endian
// integer. Used to derive deterministic parameters from content hashes.
std::uint64_t digest_word(const Digest& digest, std::size_t offset, std::size_t count = 8);

// Maps a 32-bit slice of the digest to [0, 1).
double digest_unit(const Digest& digest, std::size_t offset);

}  // namespace roomforge
