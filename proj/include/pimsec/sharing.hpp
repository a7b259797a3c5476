#pragma once

// Two-party additive sharing between the trusted host and the device.
//
// The device holds C = P - R (mod 2^32); the host holds nothing but the
// OtpContext from which R is regenerated on demand.

#include <cstddef>
#include <set>
#include <tuple>

#include "pimsec/crypto.hpp"
#include "pimsec/ring.hpp"

namespace pimsec {

struct ShareVector {
  RingVector cipher;
  OtpContext ctx;

  std::size_t size() const { return static_cast<std::size_t>(cipher.size()); }
};

/// Row-major matrix shared element-wise; element (r, c) uses keystream index
/// ctx.base_index + r * cols + c.
struct ShareMatrix {
  RingMatrix cipher;
  OtpContext ctx;
};

/// Host share R for `sv`, regenerated from its context.
RingVector host_share(const KeyRegistry& keys, const ShareVector& sv);
RingMatrix host_share(const KeyRegistry& keys, const ShareMatrix& sm);

RingVector reconstruct(const KeyRegistry& keys, const ShareVector& sv);
RingMatrix reconstruct(const KeyRegistry& keys, const ShareMatrix& sm);

/// Issues shares and enforces the one-time rule: a (key, version, base index)
/// triple masks data at most once.
class ShareDealer {
 public:
  explicit ShareDealer(const KeyRegistry& keys) : keys_(&keys) {}

  ShareVector split(const RingVector& plain, const OtpContext& ctx);
  ShareMatrix split(const RingMatrix& plain, const OtpContext& ctx);

  /// Same contract as split; counted separately so callers can report how
  /// often intermediate results were re-masked.
  ShareVector reshare(const RingVector& plain, const OtpContext& next_ctx);

  bool consumed(const OtpContext& ctx) const;
  std::size_t split_count() const { return splits_; }
  std::size_t reshare_count() const { return reshares_; }

 private:
  void consume(const OtpContext& ctx);

  const KeyRegistry* keys_;
  std::set<OtpContext> used_;
  std::size_t splits_ = 0;
  std::size_t reshares_ = 0;
};

}  // namespace pimsec
