#pragma once

// Trusted host orchestration for every execution scheme.
//
// Linear kernels come in three shapes:
//   gemv_public     y = W x    W public and resident, x private
//   gemv_private    y = X w    X private and resident, w public
//   gemv_private_t  g = X^T e  X private and resident, e revealed
// plus the embedding gather-reduce over a private table and the A2Y sigmoid.
// Results are raw ring products; fixed-point rescaling is the caller's job and
// always happens on reconstructed values.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pimsec/crypto.hpp"
#include "pimsec/gc.hpp"
#include "pimsec/mac.hpp"
#include "pimsec/pimsim.hpp"
#include "pimsec/ring.hpp"
#include "pimsec/sharing.hpp"

namespace pimsec {

enum class Scheme { cpu_insecure, cpu_secure, pim_insecure, pim_enc_dec, pim_runtime, pim_precompute };
enum class Variant { A, A2Y };

inline constexpr Scheme kAllSchemes[] = {Scheme::cpu_insecure, Scheme::cpu_secure,  Scheme::pim_insecure,
                                         Scheme::pim_enc_dec,  Scheme::pim_runtime, Scheme::pim_precompute};

std::string_view to_string(Scheme s);
std::string_view to_string(Variant v);
Scheme parse_scheme(std::string_view s);
Variant parse_variant(std::string_view s);
bool uses_device(Scheme s);
/// Schemes in which private data never crosses the channel in plaintext.
bool is_secure(Scheme s);

struct SchemeConfig {
  Scheme scheme = Scheme::pim_runtime;
  bool verify = false;
  Variant variant = Variant::A;
};

struct VerificationEvent {
  std::string step;
  Verdict verdict = Verdict::pass;
};

struct RunLog {
  std::vector<VerificationEvent> verifications;
  std::map<std::string, std::uint64_t> leaks;  // kind -> words disclosed
  std::size_t a2y_switches = 0;
  gc::A2YAccounting a2y;
  std::size_t ot_released_labels = 0;
  bool ot_one_label_per_wire = true;
};

enum TagAxes : unsigned { kColumnTags = 1, kRowTags = 2 };

/// A private vector kept in untrusted memory: a cipher share in secure
/// schemes, plaintext otherwise.
struct PrivateVector {
  RingVector words;
  std::optional<OtpContext> ctx;
};

class Host {
 public:
  using MatrixId = std::size_t;

  Host(SchemeConfig cfg, std::uint64_t seed, DeviceTopology topo = {});
  ~Host();
  Host(const Host&) = delete;
  Host& operator=(const Host&) = delete;

  const SchemeConfig& config() const { return cfg_; }
  CostReport& costs() { return costs_; }
  const CostReport& costs() const { return costs_; }
  TamperController& tamper() { return tamper_; }
  const RunLog& log() const { return log_; }
  const KeyRegistry& keys() const { return keys_; }
  const ShareDealer& dealer() const { return dealer_; }
  Device* device() { return device_.get(); }

  MatrixId register_public(const RingMatrix& w, std::string name);
  /// `axes` selects which tag sets to build when verification is on.
  MatrixId register_private(const RingMatrix& x, std::string name, unsigned axes,
                            Placement placement = Placement::row_split);

  // Offline phase of pim_precompute. Each plan is consumed, in order, by the
  // next matching online call.
  void plan_gemv_public(MatrixId w);
  void plan_gemv_private(MatrixId x, const RingVector& w);
  /// Keystream pregeneration for a private table (embedding lookups).
  void pregenerate_pads(MatrixId table);

  enum class ShareMode { split, reshare };

  RingVector gemv_public(MatrixId w, const RingVector& x, std::string_view step,
                         ShareMode mode = ShareMode::split);
  RingVector gemv_private(MatrixId x, const RingVector& w, std::string_view step);
  RingVector gemv_private_t(MatrixId x, const RingVector& e, std::string_view step);
  /// batch x cols pooled rows; ids travel in clear.
  RingMatrix embedding(MatrixId table, std::span<const std::uint32_t> ids, const RingVector& weights,
                       std::size_t batch, std::size_t pf, std::string_view step);
  /// clamp-sigmoid(rescale(X w)) evaluated by the device through garbled
  /// circuits; pim_runtime only.
  RingVector activation_a2y(MatrixId x, const RingVector& w, std::string_view step);

  PrivateVector store_private(const RingVector& v);
  RingVector load_private(const PrivateVector& v);

 private:
  struct SealedTags {
    RingVector sealed;
    OtpContext ctx;
    TagAxis axis = TagAxis::columns;
    std::size_t hashed_length = 0;
  };
  struct Plan {
    RingVector sealed_res;
    OtpContext seal_ctx;
    std::optional<OtpContext> input_ctx;  // public-W plans: pad of the future input
    RingVector operand;                   // private-X plans: the public operand
  };
  struct Entry {
    std::string name;
    bool is_private = false;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    RingMatrix host_plain;  // public matrices, and private ones in cpu_insecure
    RingMatrix host_sealed;  // cpu_secure
    std::optional<OtpContext> share_ctx;
    std::optional<OtpContext> seal_ctx;
    std::optional<Device::Handle> handle;
    std::optional<SealedTags> col_tags;
    std::optional<SealedTags> row_tags;
    std::deque<Plan> plans;
    std::optional<RingMatrix> pads;  // pregenerated host share
  };

  OtpContext fresh_ctx();
  Entry& entry(MatrixId id);
  Device& dev();
  RingVector otp(const OtpContext& ctx, std::size_t count, StreamId stream = StreamId::share);
  RingMatrix host_share_of(const Entry& e);
  RingMatrix plaintext_of(const Entry& e);
  RingVector seal_host(const OtpContext& ctx, const RingVector& v);
  RingVector open_host(const OtpContext& ctx, const RingVector& v);
  RingVector cpu_secure_roundtrip(const RingVector& v);
  SealedTags make_tags(const RingMatrix& m, TagAxis axis);
  void verify_linear(const std::optional<SealedTags>& tags, std::span<const Word> input, const RingVector& result,
                     std::string_view step);
  void record(std::string_view step, Verdict v);
  Plan pop_plan(Entry& e);
  RingVector open_plan(Plan& p, std::string_view step);
  std::pair<std::vector<std::uint64_t>, std::uint64_t> open_tags(const SealedTags& t);
  void declare_leak(const std::string& kind, std::uint64_t words);

  SchemeConfig cfg_;
  KeyRegistry keys_;
  KeyId key_;
  ShareDealer dealer_;
  CostReport costs_;
  TamperController tamper_;
  std::unique_ptr<Device> device_;
  RunLog log_;
  std::vector<Entry> entries_;
  std::uint32_t next_version_ = 1;
  std::mt19937_64 rng_;
  gc::IdealOt ot_;
  std::unique_ptr<gc::A2YSwitch> a2y_;
};

}  // namespace pimsec
