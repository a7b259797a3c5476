#include "pimsec/sharing.hpp"

#include <gtest/gtest.h>

#include <random>

#include "pimsec/errors.hpp"

namespace pimsec {
namespace {

class SharingTest : public ::testing::Test {
 protected:
  void SetUp() override { key_ = keys_.register_key_hex("2b7e151628aed2a6abf7158809cf4f3c"); }

  OtpContext ctx(std::uint32_t version, std::uint64_t base = 0) const { return {key_, version, base}; }

  RingVector random_vector(std::size_t n, std::uint32_t seed) {
    std::mt19937 rng(seed);
    RingVector v(static_cast<Eigen::Index>(n));
    for (auto& w : v) w = rng();
    return v;
  }

  KeyRegistry keys_;
  KeyId key_;
};

TEST_F(SharingTest, CipherIsPlainMinusPad) {
  ShareDealer dealer(keys_);
  const Word r0 = otp_words(keys_, ctx(1), 1)[0];
  RingVector plain(1);
  plain << 5;
  const ShareVector sv = dealer.split(plain, ctx(1));
  EXPECT_EQ(sv.cipher[0], static_cast<Word>(5 - r0));
  EXPECT_EQ(host_share(keys_, sv)[0], r0);
  EXPECT_EQ(reconstruct(keys_, sv)[0], 5u);
}

TEST_F(SharingTest, ZeroPlaintextWrapsToPadComplement) {
  ShareDealer dealer(keys_);
  const ShareVector sv = dealer.split(RingVector(RingVector::Zero(1)), ctx(2));
  const Word r = host_share(keys_, sv)[0];
  EXPECT_EQ(sv.cipher[0], static_cast<Word>((std::uint64_t{1} << 32) - r));
}

TEST_F(SharingTest, ZeroPlaintextFromPadComplement) {
  const RingVector pad = otp_words(keys_, ctx(3), 8);
  const ShareVector sv{(RingVector::Zero(8) - pad).eval(), ctx(3)};
  EXPECT_EQ(reconstruct(keys_, sv), RingVector::Zero(8));
}

TEST_F(SharingTest, RoundTripRandomVectors) {
  ShareDealer dealer(keys_);
  for (std::uint32_t i = 0; i < 1000; ++i) {
    const RingVector x = random_vector(1 + i % 17, i);
    EXPECT_EQ(reconstruct(keys_, dealer.split(x, ctx(i + 1, 64 * i))), x);
  }
}

TEST_F(SharingTest, MatrixRoundTripUsesRowMajorIndices) {
  ShareDealer dealer(keys_);
  RingMatrix m(3, 5);
  std::mt19937 rng(4);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng();
  const ShareMatrix sm = dealer.split(m, ctx(1, 40));
  EXPECT_EQ(reconstruct(keys_, sm), m);
  const RingVector pad = otp_words(keys_, ctx(1, 40), 15);
  EXPECT_EQ(sm.cipher(1, 2), static_cast<Word>(m(1, 2) - pad[1 * 5 + 2]));
}

TEST_F(SharingTest, VersionReuseIsRejected) {
  ShareDealer dealer(keys_);
  const RingVector x = random_vector(4, 1);
  dealer.split(x, ctx(1, 0));
  EXPECT_THROW(dealer.split(x, ctx(1, 0)), VersionReuseError);
  EXPECT_THROW(dealer.reshare(x, ctx(1, 0)), VersionReuseError);
  EXPECT_NO_THROW(dealer.split(x, ctx(2, 0)));
  EXPECT_NO_THROW(dealer.split(x, ctx(1, 4)));
}

TEST_F(SharingTest, ReshareKeepsPlaintextChangesCipher) {
  ShareDealer dealer(keys_);
  const RingVector layer_out = random_vector(64, 9);
  const ShareVector v1 = dealer.split(layer_out, ctx(1));
  const ShareVector v2 = dealer.reshare(layer_out, ctx(2));
  EXPECT_EQ(reconstruct(keys_, v2), layer_out);
  std::size_t equal = 0;
  for (Eigen::Index i = 0; i < 64; ++i) equal += v1.cipher[i] == v2.cipher[i] ? 1 : 0;
  EXPECT_EQ(equal, 0u);
  EXPECT_EQ(dealer.split_count(), 1u);
  EXPECT_EQ(dealer.reshare_count(), 1u);
}

TEST_F(SharingTest, LinearityOverShares) {
  ShareDealer dealer(keys_);
  std::mt19937 rng(21);
  for (std::uint32_t t = 0; t < 100; ++t) {
    RingMatrix w(8, 8);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng();
    const RingVector x = random_vector(8, 100 + t);
    const ShareVector sv = dealer.split(x, ctx(t + 1));
    const RingVector lhs = w * reconstruct(keys_, sv);
    const RingVector rhs = w * sv.cipher + w * host_share(keys_, sv);
    EXPECT_EQ(lhs, rhs);
  }
}

TEST_F(SharingTest, CipherLooksUniform) {
  ShareDealer dealer(keys_);
  // constant plaintext; bit balance of the device share should be near 1/2
  const ShareVector sv = dealer.split(RingVector(RingVector::Constant(4096, 42)), ctx(77));
  std::size_t ones = 0;
  for (Word w : sv.cipher) ones += static_cast<std::size_t>(__builtin_popcount(w));
  const double frac = static_cast<double>(ones) / (4096.0 * 32.0);
  EXPECT_NEAR(frac, 0.5, 0.02);
}

}  // namespace
}  // namespace pimsec
