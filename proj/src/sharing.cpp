#include "pimsec/sharing.hpp"

#include "pimsec/errors.hpp"

namespace pimsec {

RingVector host_share(const KeyRegistry& keys, const ShareVector& sv) {
  return otp_words(keys, sv.ctx, sv.size());
}

RingMatrix host_share(const KeyRegistry& keys, const ShareMatrix& sm) {
  const RingVector flat = otp_words(keys, sm.ctx, static_cast<std::size_t>(sm.cipher.size()));
  return Eigen::Map<const RingMatrix>(flat.data(), sm.cipher.rows(), sm.cipher.cols());
}

RingVector reconstruct(const KeyRegistry& keys, const ShareVector& sv) {
  return sv.cipher + host_share(keys, sv);
}

RingMatrix reconstruct(const KeyRegistry& keys, const ShareMatrix& sm) {
  return sm.cipher + host_share(keys, sm);
}

bool ShareDealer::consumed(const OtpContext& ctx) const { return used_.contains(ctx); }

void ShareDealer::consume(const OtpContext& ctx) {
  if (!used_.insert(ctx).second) {
    throw VersionReuseError("share context reused (version " + std::to_string(ctx.version) +
                            ", base index " + std::to_string(ctx.base_index) + ")");
  }
}

ShareVector ShareDealer::split(const RingVector& plain, const OtpContext& ctx) {
  consume(ctx);
  ++splits_;
  const RingVector pad = otp_words(*keys_, ctx, static_cast<std::size_t>(plain.size()));
  return ShareVector{plain - pad, ctx};
}

ShareMatrix ShareDealer::split(const RingMatrix& plain, const OtpContext& ctx) {
  consume(ctx);
  ++splits_;
  const RingVector flat = otp_words(*keys_, ctx, static_cast<std::size_t>(plain.size()));
  const Eigen::Map<const RingMatrix> pad(flat.data(), plain.rows(), plain.cols());
  return ShareMatrix{plain - pad, ctx};
}

ShareVector ShareDealer::reshare(const RingVector& plain, const OtpContext& next_ctx) {
  ShareVector sv = split(plain, next_ctx);
  --splits_;
  ++reshares_;
  return sv;
}

}  // namespace pimsec
