#pragma once

// Fixed-point arithmetic over Z_{2^32}.
//
// Every share, kernel operand and garbled-circuit word in the library is a
// 32-bit word. Addition, subtraction and multiplication wrap mod 2^32. The
// fixed-point view reads a word as a two's-complement integer scaled by 2^12
// (Q12). Products of two Q12 operands accumulate as Q24 in the ring and are
// rescaled back to Q12 only after reconstruction on the trusted host.

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace pimsec {

using Word = std::uint32_t;
using SignedWord = std::int32_t;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using RingMatrix = Matrix<Word>;
using RingVector = Vector<Word>;

inline constexpr int kWordBits = 32;
inline constexpr int kFracBits = 12;
inline constexpr Word kFxOne = Word{1} << kFracBits;   // 4096
inline constexpr Word kFxHalf = kFxOne >> 1;           // 2048

constexpr Word add(Word a, Word b) { return a + b; }
constexpr Word sub(Word a, Word b) { return a - b; }
constexpr Word mul(Word a, Word b) { return a * b; }
constexpr Word neg(Word a) { return Word{0} - a; }

constexpr bool is_negative(Word w) { return (w >> (kWordBits - 1)) != 0; }
constexpr SignedWord to_signed(Word w) { return static_cast<SignedWord>(w); }
constexpr Word from_signed(std::int64_t v) { return static_cast<Word>(v); }

/// Arithmetic right shift of the two's-complement reading of `w`
/// (rounds toward negative infinity).
constexpr Word arith_shift_right(Word w, int bits) {
  return static_cast<Word>(to_signed(w) >> bits);
}

/// Q12 product: sign-extended 64-bit product shifted right by 12, reduced mod 2^32.
constexpr Word fx_mul_trunc(Word a, Word b) {
  const std::int64_t product = std::int64_t{to_signed(a)} * std::int64_t{to_signed(b)};
  return static_cast<Word>(product >> kFracBits);
}

/// Exact Q12 encoding of num/den. `den` must be a positive divisor of 2^12 and
/// the value must lie in [-2^19, 2^19).
inline Word fx_encode(std::int64_t num, std::int64_t den = 1) {
  if (den <= 0 || (std::int64_t{kFxOne} % den) != 0) {
    throw std::invalid_argument("fx_encode: denominator must divide 2^12");
  }
  const std::int64_t raw = num * (std::int64_t{kFxOne} / den);
  if (raw < -(std::int64_t{1} << 31) || raw >= (std::int64_t{1} << 31)) {
    throw std::out_of_range("fx_encode: value outside Q12 range");
  }
  return static_cast<Word>(raw);
}

/// Nearest Q12 word for a real value. Used for configuration and synthetic
/// data generation only, never on the secure path.
inline Word fx_from_double(double v) {
  const double scaled = std::nearbyint(v * static_cast<double>(kFxOne));
  if (!(scaled >= -2147483648.0 && scaled < 2147483648.0)) {
    throw std::out_of_range("fx_from_double: value outside Q12 range");
  }
  return static_cast<Word>(static_cast<std::int64_t>(scaled));
}

/// A Q12 value as the exact rational raw / 2^12.
struct FxRational {
  std::int64_t num;
  std::int64_t den;
};

constexpr FxRational fx_decode(Word w) { return {to_signed(w), std::int64_t{kFxOne}}; }

inline double fx_to_double(Word w) {
  return static_cast<double>(to_signed(w)) / static_cast<double>(kFxOne);
}

constexpr Word relu(Word w) { return is_negative(w) ? Word{0} : w; }

/// clamp(x + 1/2, 0, 1) in Q12: the piecewise sigmoid stand-in.
constexpr Word fx_sigmoid_clamp(Word x) {
  const std::int64_t v = std::int64_t{to_signed(x)};
  if (v < -std::int64_t{kFxHalf}) return 0;
  if (v > std::int64_t{kFxHalf}) return kFxOne;
  return static_cast<Word>(v + kFxHalf);
}

// Expression-level helpers. All of them keep the Word scalar type and wrap
// mod 2^32 exactly like the scalar operations above.

template <typename Derived>
auto fx_rescale(const Eigen::MatrixBase<Derived>& m) {
  return m.unaryExpr([](Word w) { return arith_shift_right(w, kFracBits); });
}

template <typename Derived>
auto relu(const Eigen::MatrixBase<Derived>& m) {
  return m.unaryExpr([](Word w) { return relu(w); });
}

template <typename Derived>
auto fx_sigmoid_clamp(const Eigen::MatrixBase<Derived>& m) {
  return m.unaryExpr([](Word w) { return fx_sigmoid_clamp(w); });
}

template <typename DerivedA, typename DerivedB>
RingVector ring_gemv(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& x) {
  if (a.cols() != x.rows()) throw std::invalid_argument("ring_gemv: dimension mismatch");
  return (a.derived() * x.derived()).eval();
}

template <typename DerivedA, typename DerivedB>
RingVector ring_gemv_transposed(const Eigen::MatrixBase<DerivedA>& a,
                                const Eigen::MatrixBase<DerivedB>& e) {
  if (a.rows() != e.rows()) throw std::invalid_argument("ring_gemv_transposed: dimension mismatch");
  return (a.derived().transpose() * e.derived()).eval();
}

}  // namespace pimsec
