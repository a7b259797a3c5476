#include "pimsec/crypto.hpp"

#include <openssl/evp.h>

#include <cstring>
#include <stdexcept>
#include <vector>

#include "pimsec/errors.hpp"

namespace pimsec {

namespace {

struct CipherCtxDeleter {
  void operator()(EVP_CIPHER_CTX* ctx) const { EVP_CIPHER_CTX_free(ctx); }
};

void store_le32(std::uint8_t* out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

void store_le64(std::uint8_t* out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

std::uint32_t load_le32(const std::uint8_t* in) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{in[i]} << (8 * i);
  return v;
}

std::uint64_t load_le64(const std::uint8_t* in) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{in[i]} << (8 * i);
  return v;
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

RingVector xor_stream(const KeyRegistry& keys, const OtpContext& ctx, std::span<const Word> in) {
  RingVector pad = otp_words(keys, ctx, in.size(), StreamId::seal);
  for (std::size_t i = 0; i < in.size(); ++i) pad[static_cast<Eigen::Index>(i)] ^= in[i];
  return pad;
}

}  // namespace

std::string KeyId::hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(32);
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

void Aes128Prp::encrypt_blocks(std::span<const Block> in, std::span<Block> out) const {
  if (in.size() != out.size()) throw std::invalid_argument("Aes128Prp: size mismatch");
  if (in.empty()) return;
  std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter> ctx(EVP_CIPHER_CTX_new());
  if (!ctx || EVP_EncryptInit_ex(ctx.get(), EVP_aes_128_ecb(), nullptr, key_.data(), nullptr) != 1) {
    throw Error("Aes128Prp: cipher initialisation failed");
  }
  EVP_CIPHER_CTX_set_padding(ctx.get(), 0);
  int written = 0;
  const int bytes = static_cast<int>(in.size() * sizeof(Block));
  if (EVP_EncryptUpdate(ctx.get(), reinterpret_cast<unsigned char*>(out.data()), &written,
                        reinterpret_cast<const unsigned char*>(in.data()), bytes) != 1 ||
      written != bytes) {
    throw Error("Aes128Prp: encryption failed");
  }
}

KeyBytes parse_key_hex(std::string_view hex) {
  if (hex.size() != 32) throw ConfigError("key must be 32 hex characters (16 bytes)");
  KeyBytes key{};
  for (std::size_t i = 0; i < 16; ++i) {
    const int hi = hex_value(hex[2 * i]);
    const int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw ConfigError("key contains a non-hex character");
    key[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return key;
}

KeyId KeyRegistry::register_key(const KeyBytes& key) {
  auto prp = std::make_shared<Aes128Prp>(key);
  Block zero{};
  Block check{};
  prp->encrypt_blocks(std::span<const Block>(&zero, 1), std::span<Block>(&check, 1));
  KeyId id;
  std::memcpy(id.bytes.data(), check.data(), check.size());
  keys_.emplace(id, std::move(prp));
  return id;
}

const Prp& KeyRegistry::prp(const KeyId& id) const {
  auto it = keys_.find(id);
  if (it == keys_.end()) throw UnknownKeyError("unknown key id " + id.hex());
  return *it->second;
}

Block counter_block(std::uint32_t version, StreamId stream, std::uint64_t block_index) {
  Block b{};
  store_le32(b.data(), version);
  store_le32(b.data() + 4, static_cast<std::uint32_t>(stream));
  store_le64(b.data() + 8, block_index);
  return b;
}

std::size_t blocks_spanned(std::uint64_t base_index, std::size_t count) {
  if (count == 0) return 0;
  const std::uint64_t first = base_index / 4;
  const std::uint64_t last = (base_index + count - 1) / 4;
  return static_cast<std::size_t>(last - first + 1);
}

RingVector otp_words(const KeyRegistry& keys, const OtpContext& ctx, std::size_t count,
                     StreamId stream) {
  const Prp& prp = keys.prp(ctx.key);
  RingVector words(static_cast<Eigen::Index>(count));
  if (count == 0) return words;

  const std::uint64_t first_block = ctx.base_index / 4;
  const std::size_t nblocks = blocks_spanned(ctx.base_index, count);
  std::vector<Block> counters(nblocks);
  for (std::size_t b = 0; b < nblocks; ++b) {
    counters[b] = counter_block(ctx.version, stream, first_block + b);
  }
  std::vector<Block> stream_blocks(nblocks);
  prp.encrypt_blocks(counters, stream_blocks);

  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t index = ctx.base_index + i;
    const Block& blk = stream_blocks[index / 4 - first_block];
    words[static_cast<Eigen::Index>(i)] = load_le32(blk.data() + 4 * (index % 4));
  }
  return words;
}

RingVector seal(const KeyRegistry& keys, const OtpContext& ctx, std::span<const Word> plain) {
  return xor_stream(keys, ctx, plain);
}

RingVector open(const KeyRegistry& keys, const OtpContext& ctx, std::span<const Word> sealed) {
  return xor_stream(keys, ctx, sealed);
}

std::uint64_t derive_mac_secret(const KeyRegistry& keys, const OtpContext& ctx, std::uint64_t q) {
  if (q < 3) throw std::invalid_argument("derive_mac_secret: modulus too small");
  const Block counter = counter_block(ctx.version, StreamId::mac_secret, ctx.base_index / 4);
  Block out{};
  keys.prp(ctx.key).encrypt_blocks(std::span<const Block>(&counter, 1), std::span<Block>(&out, 1));
  return load_le64(out.data()) % (q - 1) + 1;
}

}  // namespace pimsec
