#pragma once

// Linear modular hashing over Z_q, q = 2^61 - 1.
//
// For an m x n matrix P the column tags are
//
//   Tag_j = sum_{i=0}^{m-1} P_{i,j} * s^{m-i}  (mod q)
//
// and the same kernel applied to the tags (FTag_e = sum_j Tag_j x_j) equals
// the hash of the true product y = P x (FTag_r = sum_i y_i s^{m-i}). Words are
// lifted into Z_q through their two's-complement value, so the identity holds
// whenever every entry of P x fits in a signed 32-bit word.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pimsec/crypto.hpp"
#include "pimsec/ring.hpp"

namespace pimsec {

inline constexpr std::uint64_t kMacPrime = (std::uint64_t{1} << 61) - 1;

enum class TagAxis { columns, rows };

struct VerificationTag {
  std::vector<std::uint64_t> residues;
  std::uint64_t q = kMacPrime;
  TagAxis axis = TagAxis::columns;
  /// Length of the hashed dimension (m for column tags, n for row tags).
  std::size_t hashed_length = 0;
  OtpContext s_ctx;
};

enum class Verdict { pass, fail };

constexpr std::uint64_t mod_add(std::uint64_t a, std::uint64_t b, std::uint64_t q) {
  const std::uint64_t s = a + b;  // a, b < q < 2^63
  return s >= q ? s - q : s;
}

constexpr std::uint64_t mod_mul(std::uint64_t a, std::uint64_t b, std::uint64_t q) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % q);
}

/// Signed lift of a ring word into [0, q).
constexpr std::uint64_t lift(Word w, std::uint64_t q) {
  const std::int64_t v = to_signed(w);
  return v >= 0 ? static_cast<std::uint64_t>(v) % q
                : q - (static_cast<std::uint64_t>(-v) % q);
}

/// s^k for k = len, len-1, ..., 1 (index i holds s^{len-i}).
std::vector<std::uint64_t> descending_powers(std::uint64_t s, std::size_t len, std::uint64_t q);

template <typename Derived>
VerificationTag gen_tags(const Eigen::MatrixBase<Derived>& p, std::uint64_t s, std::uint64_t q,
                         TagAxis axis) {
  const bool cols = axis == TagAxis::columns;
  const auto hashed = static_cast<std::size_t>(cols ? p.rows() : p.cols());
  const auto outer = static_cast<std::size_t>(cols ? p.cols() : p.rows());
  const std::vector<std::uint64_t> pw = descending_powers(s, hashed, q);

  VerificationTag tag;
  tag.q = q;
  tag.axis = axis;
  tag.hashed_length = hashed;
  tag.residues.assign(outer, 0);
  for (std::size_t j = 0; j < outer; ++j) {
    std::uint64_t acc = 0;
    for (std::size_t i = 0; i < hashed; ++i) {
      const Word w = cols ? p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))
                          : p(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
      acc = mod_add(acc, mod_mul(lift(w, q), pw[i], q), q);
    }
    tag.residues[j] = acc;
  }
  return tag;
}

/// FTag_e = sum_j Tag_j * x_j (mod q).
std::uint64_t tag_kernel_gemv(const VerificationTag& tags, std::span<const Word> x);

/// FTag_r = sum_i y_i * s^{m-i} (mod q).
std::uint64_t hash_result(std::span<const Word> y, std::uint64_t s, std::uint64_t q);

constexpr Verdict verify(std::uint64_t ftag_e, std::uint64_t ftag_r) {
  return ftag_e == ftag_r ? Verdict::pass : Verdict::fail;
}

inline std::span<const Word> as_span(const RingVector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

/// MAC-then-encrypt storage: each residue becomes (low word, high word),
/// sealed under `ctx`.
RingVector seal_tags(const KeyRegistry& keys, const OtpContext& ctx, const VerificationTag& tags);
std::vector<std::uint64_t> open_tag_residues(const KeyRegistry& keys, const OtpContext& ctx,
                                             const RingVector& sealed, std::uint64_t q);

}  // namespace pimsec
