#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace lwm2m::crypto {

constexpr std::size_t kKeyBytes = 16;
constexpr std::size_t kTagBytes = 8;    // AES-128-CCM with 8-byte authentication tag
constexpr std::size_t kNonceBytes = 13; // CCM with L=2

using Key = std::array<std::uint8_t, kKeyBytes>;

// AES-128, encryption direction only (CCM needs nothing else).
class Aes128 {
public:
    explicit Aes128(const Key& key);
    void encrypt_block(const std::uint8_t in[16], std::uint8_t out[16]) const;

private:
    std::array<std::uint8_t, 176> round_keys_{};
};

// Returns ciphertext || tag(8).
std::vector<std::uint8_t> ccm_seal(const Key& key, std::span<const std::uint8_t> nonce,
                                   std::span<const std::uint8_t> aad,
                                   std::span<const std::uint8_t> plaintext);

// Returns the plaintext, or nullopt when authentication fails.
std::optional<std::vector<std::uint8_t>> ccm_open(const Key& key, std::span<const std::uint8_t> nonce,
                                                  std::span<const std::uint8_t> aad,
                                                  std::span<const std::uint8_t> sealed);

// Keyed 16-byte MAC for stateless handshake cookies (CBC-MAC over a
// length-prefixed input; inputs here are short and fixed-format).
std::array<std::uint8_t, 16> mac16(const Key& key, std::string_view data);

}  // namespace lwm2m::crypto
