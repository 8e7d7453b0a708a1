#include "roomforge/core/hash.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace roomforge {

Digest sha256(std::string_view bytes) {
  Digest out{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 ||
      len != out.size()) {
    throw std::runtime_error("sha256 failed");
  }
  return out;
}

std::string to_hex(const Digest& digest) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(digest.size() * 2);
  for (auto b : digest) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0xF]);
  }
  return out;
}

std::string sha256_hex(std::string_view bytes) { return to_hex(sha256(bytes)); }

std::uint64_t digest_word(const Digest& digest, std::size_t offset, std::size_t count) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < count; ++i) {
    v = (v << 8) | digest[(offset + i) % digest.size()];
  }
  return v;
}

double digest_unit(const Digest& digest, std::size_t offset) {
  return static_cast<double>(digest_word(digest, offset, 4)) / 4294967296.0;
}

}  // namespace roomforge
