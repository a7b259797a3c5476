#include "pimsec/mac.hpp"

#include <gtest/gtest.h>

#include <random>

#include "pimsec/errors.hpp"

namespace pimsec {
namespace {

// Direct polynomial evaluation: sum_i v_i * s^(m-i) mod q, each power built
// by repeated multiplication, values taken as signed integers.
std::uint64_t poly_oracle(const std::vector<std::int64_t>& v, std::uint64_t s, std::uint64_t q) {
  const std::size_t m = v.size();
  unsigned __int128 acc = 0;
  for (std::size_t i = 0; i < m; ++i) {
    unsigned __int128 p = 1;
    for (std::size_t k = 0; k < m - i; ++k) p = (p * s) % q;
    const std::int64_t r = ((v[i] % static_cast<std::int64_t>(q)) + static_cast<std::int64_t>(q)) %
                           static_cast<std::int64_t>(q);
    acc = (acc + p * static_cast<unsigned __int128>(r)) % q;
  }
  return static_cast<std::uint64_t>(acc);
}

RingMatrix hand_matrix() {
  RingMatrix w(2, 2);
  w << 1, 2, 3, 4;
  return w;
}

TEST(MacTest, GenTagsHandInstance) {
  const VerificationTag t = gen_tags(hand_matrix(), 10, 97, TagAxis::columns);
  ASSERT_EQ(t.residues.size(), 2u);
  EXPECT_EQ(t.residues[0], 33u);
  EXPECT_EQ(t.residues[1], 46u);
  EXPECT_EQ(t.residues[0], poly_oracle({1, 3}, 10, 97));
  EXPECT_EQ(t.residues[1], poly_oracle({2, 4}, 10, 97));
}

TEST(MacTest, GenTagsTrivialCases) {
  const VerificationTag zero = gen_tags(RingMatrix::Zero(5, 3), 12345, kMacPrime, TagAxis::columns);
  for (auto r : zero.residues) EXPECT_EQ(r, 0u);
  RingMatrix one(1, 1);
  one << 77;
  EXPECT_EQ(gen_tags(one, 10, 97, TagAxis::columns).residues[0], (77u * 10u) % 97u);
}

TEST(MacTest, RowTagsHashAlongRows) {
  const VerificationTag t = gen_tags(hand_matrix(), 10, 97, TagAxis::rows);
  EXPECT_EQ(t.residues[0], poly_oracle({1, 2}, 10, 97));
  EXPECT_EQ(t.residues[1], poly_oracle({3, 4}, 10, 97));
  EXPECT_EQ(t.hashed_length, 2u);
}

TEST(MacTest, TagKernelHandInstance) {
  const VerificationTag t = gen_tags(hand_matrix(), 10, 97, TagAxis::columns);
  const std::vector<Word> ones{1, 1};
  EXPECT_EQ(tag_kernel_gemv(t, ones), 79u);
  const std::vector<Word> zeros{0, 0};
  EXPECT_EQ(tag_kernel_gemv(t, zeros), 0u);
  const std::vector<Word> e1{0, 1};
  EXPECT_EQ(tag_kernel_gemv(t, e1), t.residues[1]);
  const std::vector<Word> wrong{1, 1, 1};
  EXPECT_THROW(tag_kernel_gemv(t, wrong), DimensionError);
}

TEST(MacTest, HashResultHandInstance) {
  const std::vector<Word> y{3, 7};
  EXPECT_EQ(hash_result(y, 10, 97), 79u);
  const std::vector<Word> zeros{0, 0, 0};
  EXPECT_EQ(hash_result(zeros, 10, 97), 0u);
  const std::vector<Word> one{1};
  EXPECT_EQ(hash_result(one, 10, 97), 10u);
  EXPECT_EQ(hash_result(one, 123456789, kMacPrime), 123456789u);
}

TEST(MacTest, VerifyComparesResidues) {
  EXPECT_EQ(verify(79, 79), Verdict::pass);
  EXPECT_EQ(verify(79, 80), Verdict::fail);
}

TEST(MacTest, SignedLiftMatchesIntegerValue) {
  EXPECT_EQ(lift(5, 97), 5u);
  EXPECT_EQ(lift(from_signed(-1), 97), 96u);
  EXPECT_EQ(lift(from_signed(-1), kMacPrime), kMacPrime - 1);
  EXPECT_EQ(lift(0x80000000u, kMacPrime), kMacPrime - (std::uint64_t{1} << 31));
}

TEST(MacTest, HomomorphismOnSignedNoOverflowInstances) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    const int m = 1 + static_cast<int>(rng() % 64), n = 1 + static_cast<int>(rng() % 64);
    // |W|, |x| < 2^12 keeps every |y_i| < 64 * 2^24 < 2^31
    std::uniform_int_distribution<std::int32_t> dist(-4095, 4095);
    RingMatrix w(m, n);
    RingVector x(n);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = from_signed(dist(rng));
    for (auto& v : x) v = from_signed(dist(rng));
    const RingVector y = ring_gemv(w, x);
    const std::uint64_t s = 1 + rng() % (kMacPrime - 1);
    const VerificationTag t = gen_tags(w, s, kMacPrime, TagAxis::columns);
    EXPECT_EQ(tag_kernel_gemv(t, as_span(x)), hash_result(as_span(y), s, kMacPrime));

    // Row-direction tags verify X^T e.
    RingVector e(m);
    for (auto& v : e) v = from_signed(dist(rng));
    const RingVector g = ring_gemv_transposed(w, e);
    const VerificationTag rt = gen_tags(w, s, kMacPrime, TagAxis::rows);
    EXPECT_EQ(tag_kernel_gemv(rt, as_span(e)), hash_result(as_span(g), s, kMacPrime));
  }
}

TEST(MacTest, SingleWordCorruptionAlwaysDetected) {
  std::mt19937_64 rng(32);
  std::uniform_int_distribution<std::int32_t> dist(-4095, 4095);
  RingMatrix w(16, 16);
  RingVector x(16);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = from_signed(dist(rng));
  for (auto& v : x) v = from_signed(dist(rng));
  const std::uint64_t s = 1 + rng() % (kMacPrime - 1);
  const VerificationTag t = gen_tags(w, s, kMacPrime, TagAxis::columns);
  const std::uint64_t expected = tag_kernel_gemv(t, as_span(x));
  const RingVector y = ring_gemv(w, x);
  for (int trial = 0; trial < 1000; ++trial) {
    RingVector bad = y;
    const auto pos = static_cast<Eigen::Index>(rng() % 16);
    Word nw;
    do nw = static_cast<Word>(rng()); while (nw == bad[pos]);
    bad[pos] = nw;
    EXPECT_EQ(verify(expected, hash_result(as_span(bad), s, kMacPrime)), Verdict::fail);
  }
}

TEST(MacTest, SealedTagsRoundTrip) {
  KeyRegistry keys;
  const KeyId k = keys.register_key_hex("ffeeddccbbaa99887766554433221100");
  const OtpContext ctx{k, 5, 0};
  const VerificationTag t = gen_tags(hand_matrix(), 1234567, kMacPrime, TagAxis::columns);
  const RingVector sealed = seal_tags(keys, ctx, t);
  EXPECT_EQ(sealed.size(), 4);
  EXPECT_EQ(open_tag_residues(keys, ctx, sealed, kMacPrime), t.residues);
}

}  // namespace
}  // namespace pimsec
