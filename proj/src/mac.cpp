#include "pimsec/mac.hpp"

#include "pimsec/errors.hpp"

namespace pimsec {

std::vector<std::uint64_t> descending_powers(std::uint64_t s, std::size_t len, std::uint64_t q) {
  std::vector<std::uint64_t> pw(len);
  std::uint64_t p = s % q;
  for (std::size_t k = 0; k < len; ++k) {
    pw[len - 1 - k] = p;  // index len-1 holds s^1
    p = mod_mul(p, s, q);
  }
  return pw;
}

std::uint64_t tag_kernel_gemv(const VerificationTag& tags, std::span<const Word> x) {
  if (x.size() != tags.residues.size()) {
    throw DimensionError("tag_kernel_gemv: operand length does not match tag count");
  }
  std::uint64_t acc = 0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    acc = mod_add(acc, mod_mul(tags.residues[j] % tags.q, lift(x[j], tags.q), tags.q), tags.q);
  }
  return acc;
}

std::uint64_t hash_result(std::span<const Word> y, std::uint64_t s, std::uint64_t q) {
  const std::vector<std::uint64_t> pw = descending_powers(s, y.size(), q);
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < y.size(); ++i) acc = mod_add(acc, mod_mul(lift(y[i], q), pw[i], q), q);
  return acc;
}

RingVector seal_tags(const KeyRegistry& keys, const OtpContext& ctx, const VerificationTag& tags) {
  RingVector words(static_cast<Eigen::Index>(2 * tags.residues.size()));
  for (std::size_t j = 0; j < tags.residues.size(); ++j) {
    words[static_cast<Eigen::Index>(2 * j)] = static_cast<Word>(tags.residues[j]);
    words[static_cast<Eigen::Index>(2 * j + 1)] = static_cast<Word>(tags.residues[j] >> 32);
  }
  return seal(keys, ctx, words);
}

std::vector<std::uint64_t> open_tag_residues(const KeyRegistry& keys, const OtpContext& ctx,
                                             const RingVector& sealed, std::uint64_t q) {
  const RingVector words = open(keys, ctx, sealed);
  std::vector<std::uint64_t> residues(static_cast<std::size_t>(words.size() / 2));
  for (std::size_t j = 0; j < residues.size(); ++j) {
    const std::uint64_t lo = words[static_cast<Eigen::Index>(2 * j)];
    const std::uint64_t hi = words[static_cast<Eigen::Index>(2 * j + 1)];
    // A corrupted store can open to a value >= q; reduce so the comparison
    // simply fails instead of tripping range assumptions downstream.
    residues[j] = ((hi << 32) | lo) % q;
  }
  return residues;
}

}  // namespace pimsec
