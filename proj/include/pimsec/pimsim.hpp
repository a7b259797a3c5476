#pragma once

// Simulated PIM device: DPUs with private MRAM, kernels over resident data,
// a host<->device channel, tamper hooks and operation counters.
//
// Resident data is kept as one logical matrix per handle plus its placement;
// kernels slice it per DPU, run each slice independently and concatenate.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pimsec/crypto.hpp"
#include "pimsec/gc.hpp"
#include "pimsec/ring.hpp"

namespace pimsec {

struct DeviceTopology {
  std::size_t dpu_count = 4;
  std::size_t mram_bytes_per_dpu = std::size_t{64} << 20;
  std::size_t tasklets_per_dpu = 24;  // cost divisor only

  void validate() const;
};

struct CostLedger {
  std::uint64_t bytes_h2d = 0;
  std::uint64_t bytes_d2h = 0;
  std::uint64_t device_mac_ops = 0;
  std::uint64_t device_prf_calls = 0;
  std::uint64_t host_mac_ops = 0;
  std::uint64_t host_prf_calls = 0;
  std::uint64_t gc_bytes = 0;
  std::uint64_t verify_ops = 0;

  friend bool operator==(const CostLedger&, const CostLedger&) = default;
};

enum class Phase { offline, online };

class CostReport {
 public:
  CostLedger offline;
  CostLedger online;

  CostLedger& current() { return phase_ == Phase::offline ? offline : online; }
  Phase phase() const { return phase_; }
  void set_phase(Phase p) { phase_ = p; }

 private:
  Phase phase_ = Phase::online;
};

/// Switches the ledger for the lifetime of the guard.
class PhaseGuard {
 public:
  PhaseGuard(CostReport& r, Phase p) : r_(r), saved_(r.phase()) { r_.set_phase(p); }
  ~PhaseGuard() { r_.set_phase(saved_); }
  PhaseGuard(const PhaseGuard&) = delete;
  PhaseGuard& operator=(const PhaseGuard&) = delete;

 private:
  CostReport& r_;
  Phase saved_;
};

enum class TamperTarget { resident_share, channel_h2d, channel_d2h, device_result, gc_table, precompute_store };
enum class Mutation { bit_flip, word_randomize };

std::string_view to_string(TamperTarget t);
std::string_view to_string(Mutation m);
TamperTarget parse_tamper_target(std::string_view s);

struct TamperSpec {
  TamperTarget target = TamperTarget::channel_d2h;
  std::optional<std::uint64_t> position;  // nullopt: random
  Mutation mutation = Mutation::word_randomize;

  /// "target[:position|random[:bit_flip|word_randomize]]"
  static TamperSpec parse(std::string_view text);
  std::string str() const;
};

struct TamperRecord {
  TamperSpec spec;
  std::string site;
  std::uint64_t index = 0;
  Word before = 0;
  Word after = 0;
};

/// Holds at most one armed mutation and applies it exactly once, at the first
/// access that matches its target.
class TamperController {
 public:
  explicit TamperController(std::uint64_t seed = 0) : rng_(seed) {}

  void arm(const TamperSpec& spec);
  bool pending(TamperTarget t) const { return spec_ && !fired_ && spec_->target == t; }
  bool fired() const { return fired_; }

  /// Mutates one word of `words` if armed for `t`; returns whether it fired.
  bool try_apply(TamperTarget t, std::span<Word> words, std::string_view site);
  /// Row hook for garbled evaluation over a circuit with `and_count` AND
  /// gates: corrupts one 32-bit word of the row read at gate
  /// (position mod and_count), word (position / and_count) mod 4.
  gc::RowTap gc_tap(std::size_t and_count, std::string_view site);

  const std::vector<TamperRecord>& log() const { return log_; }

 private:
  std::uint64_t pick_position(std::uint64_t extent);
  Word mutate(Word w);

  std::optional<TamperSpec> spec_;
  bool fired_ = false;
  std::mt19937_64 rng_;
  std::vector<TamperRecord> log_;
};

/// What a buffer holds, for the channel taint check.
enum class DataClass { public_data, cipher_share, sealed, garbled, revealed, private_plain };
enum class Placement { row_split, col_split, replicate };

std::string_view to_string(DataClass c);

class Device {
 public:
  using Handle = std::size_t;

  /// `secure` turns on the taint check: private_plain may not cross the channel.
  Device(DeviceTopology topo, CostReport& costs, TamperController& tamper, bool secure);

  const DeviceTopology& topology() const { return topo_; }

  /// Host-to-device copy of a matrix, laid out per `placement`.
  Handle load(const RingMatrix& m, Placement placement, DataClass cls, std::string name);
  void release(Handle h);
  const RingMatrix& resident(Handle h) const;
  /// Bytes held by each DPU across all live handles.
  std::vector<std::size_t> mram_usage() const;
  /// [begin, end) row (row_split) or column (col_split) range owned by `dpu`.
  std::pair<Eigen::Index, Eigen::Index> slice(Handle h, std::size_t dpu) const;

  /// Host-to-device transfer of a vector; `replicated` copies it to every DPU.
  RingVector send(const RingVector& v, DataClass cls, std::string_view site, bool replicated);
  /// Device-to-host transfer.
  RingVector gather(RingVector v, DataClass cls, std::string_view site);

  // Kernels. The *_local forms leave the result on the device (no transfer);
  // the plain forms gather it to the host.
  RingVector gemv_local(Handle w, const RingVector& x);
  RingVector gemv(Handle w, const RingVector& x, DataClass result_cls);
  /// X^T e over a row-split X: one partial of length cols per DPU, summed on
  /// gather (the host adds the partials).
  std::vector<RingVector> grad_partials(Handle x, const RingVector& e);
  RingVector grad(Handle x, const RingVector& e, DataClass result_cls);
  /// out[k] = sum_j weights[k*pf + j] * table[ids[k*pf + j]] for k < batch.
  RingMatrix embedding_local(Handle table, std::span<const std::uint32_t> ids, const RingVector& weights,
                             std::size_t batch, std::size_t pf);

  // enc/dec baseline: the device holds the key. open_copy decrypts a sealed
  // resident buffer into a fresh device-side handle.
  Handle open_copy(Handle h, const KeyRegistry& keys, const OtpContext& ctx);
  RingVector open_vector(const KeyRegistry& keys, const OtpContext& ctx, const RingVector& sealed);
  RingVector seal_vector(const KeyRegistry& keys, const OtpContext& ctx, const RingVector& plain);

  /// Receives the garbled tables (gc_bytes) and garbler labels, evaluates with
  /// the evaluator labels obtained through OT, and returns the output labels.
  std::vector<gc::Label> evaluate_garbled(const gc::GarbledCircuit& gc, std::span<const gc::Label> garbler_labels,
                                          std::span<const gc::Label> evaluator_labels,
                                          gc::EvaluationTrace* trace = nullptr);

 private:
  struct Buffer {
    RingMatrix data;
    Placement placement;
    DataClass cls;
    std::string name;
    bool live = true;
  };

  Buffer& buffer(Handle h);
  const Buffer& buffer(Handle h) const;
  void check_taint(DataClass cls, std::string_view site) const;
  std::vector<std::size_t> footprint(const Buffer& b) const;
  void tamper_resident(Handle h, std::string_view site);

  DeviceTopology topo_;
  CostReport* costs_;
  TamperController* tamper_;
  bool secure_;
  std::vector<Buffer> buffers_;
};

}  // namespace pimsec
