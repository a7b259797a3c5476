#pragma once

// Counter-mode keystreams.
//
// A keystream word is addressed by (key, version, stream, element index).
// Four consecutive 32-bit words share one 128-bit PRP output block whose
// counter input is, little-endian:
//
//   bytes  0..3   version
//   bytes  4..7   stream id  (0 share OTPs, 1 at-rest sealing, 2 MAC secret)
//   bytes  8..15  block index = (base_index + i) / 4
//
// Word i of a context is slot (base_index + i) % 4 of that block, read
// little-endian. Nothing here depends on plaintext, which is what allows the
// host to generate pads ahead of time.

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "pimsec/ring.hpp"

namespace pimsec {

using Block = std::array<std::uint8_t, 16>;
using KeyBytes = std::array<std::uint8_t, 16>;

/// Opaque handle naming a registered key.
struct KeyId {
  std::array<std::uint8_t, 16> bytes{};

  auto operator<=>(const KeyId&) const = default;
  std::string hex() const;
};

enum class StreamId : std::uint32_t {
  share = 0,
  seal = 1,
  mac_secret = 2,
};

struct OtpContext {
  KeyId key;
  std::uint32_t version = 0;
  std::uint64_t base_index = 0;

  auto operator<=>(const OtpContext&) const = default;
};

/// Keyed pseudorandom permutation on 128-bit blocks.
class Prp {
 public:
  virtual ~Prp() = default;
  virtual void encrypt_blocks(std::span<const Block> in, std::span<Block> out) const = 0;
};

class Aes128Prp final : public Prp {
 public:
  explicit Aes128Prp(const KeyBytes& key) : key_(key) {}
  void encrypt_blocks(std::span<const Block> in, std::span<Block> out) const override;

 private:
  KeyBytes key_;
};

KeyBytes parse_key_hex(std::string_view hex);

class KeyRegistry {
 public:
  /// Registers `key` and returns its handle (the AES key-check value,
  /// E_k(0^128)). Registering the same key twice returns the same handle.
  KeyId register_key(const KeyBytes& key);
  KeyId register_key_hex(std::string_view hex) { return register_key(parse_key_hex(hex)); }

  const Prp& prp(const KeyId& id) const;
  bool contains(const KeyId& id) const { return keys_.contains(id); }

 private:
  std::map<KeyId, std::shared_ptr<const Prp>> keys_;
};

Block counter_block(std::uint32_t version, StreamId stream, std::uint64_t block_index);

/// Number of PRP blocks touched by `count` words starting at `base_index`.
std::size_t blocks_spanned(std::uint64_t base_index, std::size_t count);

RingVector otp_words(const KeyRegistry& keys, const OtpContext& ctx, std::size_t count,
                     StreamId stream = StreamId::share);

/// XORs the at-rest keystream (stream 1) into `words`.
RingVector seal(const KeyRegistry& keys, const OtpContext& ctx, std::span<const Word> plain);
RingVector open(const KeyRegistry& keys, const OtpContext& ctx, std::span<const Word> sealed);

inline RingVector seal(const KeyRegistry& keys, const OtpContext& ctx, const RingVector& plain) {
  return seal(keys, ctx, std::span<const Word>(plain.data(), static_cast<std::size_t>(plain.size())));
}
inline RingVector open(const KeyRegistry& keys, const OtpContext& ctx, const RingVector& sealed) {
  return open(keys, ctx, std::span<const Word>(sealed.data(), static_cast<std::size_t>(sealed.size())));
}

/// MAC secret s in [1, q-1]: the first 64 bits (little-endian) of the first
/// keystream block of `ctx` on stream 2, reduced mod (q - 1), plus one.
std::uint64_t derive_mac_secret(const KeyRegistry& keys, const OtpContext& ctx, std::uint64_t q);

}  // namespace pimsec
