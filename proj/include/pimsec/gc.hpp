#pragma once

// Yao garbled circuits with free-XOR and point-and-permute.
//
// Every wire carries two 128-bit labels, label(1) = label(0) ^ delta, with
// lsb(delta) = 1 so the low bit of a label (its point bit) is a random
// permutation of the plaintext bit. XOR and NOT gates cost nothing; each AND
// gate carries a full four-row table
//
//   table[2 * lsb(A) + lsb(B)] = H(A, B, gate) ^ C_{a & b}
//
// The garbler (the trusted host) builds the tables; the evaluator (the
// device) holds exactly one label per wire and decrypts exactly one row per
// AND gate.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <utility>
#include <memory>
#include <span>
#include <vector>

#include "pimsec/crypto.hpp"
#include "pimsec/ring.hpp"

namespace pimsec::gc {

struct Label {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;

  bool point() const { return (lo & 1) != 0; }
  friend Label operator^(const Label& a, const Label& b) { return {a.lo ^ b.lo, a.hi ^ b.hi}; }
  Label& operator^=(const Label& o) {
    lo ^= o.lo;
    hi ^= o.hi;
    return *this;
  }
  friend bool operator==(const Label&, const Label&) = default;
};

struct LabelPair {
  Label zero;
  Label one;

  const Label& select(bool bit) const { return bit ? one : zero; }
};

enum class GateKind : std::uint8_t { XOR, AND, NOT };

using WireId = std::uint32_t;

struct Gate {
  GateKind kind;
  WireId in0;
  WireId in1;  // unused for NOT
  WireId out;
};

struct BoolCircuit {
  std::size_t wire_count = 0;
  std::vector<WireId> garbler_inputs;
  std::vector<WireId> evaluator_inputs;
  /// Constant wires; the garbler supplies their active label.
  std::vector<std::pair<WireId, bool>> constants;
  std::vector<Gate> gates;
  std::vector<WireId> outputs;

  std::size_t and_count() const;
  /// Throws if a gate reads a wire that has not been defined yet.
  void validate() const;
  std::vector<bool> evaluate_plain(const std::vector<bool>& garbler_bits,
                                   const std::vector<bool>& evaluator_bits) const;
};

/// Builds circuits with constant propagation: gates whose inputs are known
/// constants fold away and never reach the gate list.
class CircuitBuilder {
 public:
  /// A bit is either a circuit wire or a known constant.
  struct Bit {
    std::int64_t wire = -1;  // -1 means constant
    bool value = false;

    bool is_const() const { return wire < 0; }
  };
  using Bits = std::vector<Bit>;

  static Bit constant(bool v) { return Bit{-1, v}; }

  Bits garbler_input(std::size_t n);
  Bits evaluator_input(std::size_t n);

  Bit XOR(Bit a, Bit b);
  Bit AND(Bit a, Bit b);
  Bit NOT(Bit a);

  /// (a + b) mod 2^n, ripple carry, one AND per bit except the top one.
  Bits add(const Bits& a, const Bits& b);
  /// (a - b) mod 2^n.
  Bits sub(const Bits& a, const Bits& b);
  /// Constant word as n bits, LSB first.
  static Bits word(Word value, std::size_t n);
  /// Two's-complement arithmetic shift right (wiring only).
  static Bits shift_right_arith(const Bits& a, std::size_t shift);

  BoolCircuit build(const Bits& outputs);

 private:
  WireId fresh();

  BoolCircuit circuit_;
};

std::vector<bool> word_to_bits(Word w, std::size_t n);
Word bits_to_word(const std::vector<bool>& bits);

/// (garbler word + evaluator word) mod 2^n. Garbler feeds R bits, evaluator C bits.
BoolCircuit build_add_mod_circuit(std::size_t word_bits = 32);
/// msb((garbler - evaluator) mod 2^n).
BoolCircuit build_sign_compare_circuit(std::size_t word_bits = 32);
/// clamp(x + 1/2, 0, 1) on an evaluator-supplied Q-format word.
BoolCircuit build_sigmoid_circuit(std::size_t word_bits = 32, std::size_t frac_bits = 12);
/// sigmoid(arith_shift((R + C) mod 2^n, pre_shift)) with R from the garbler
/// and C from the evaluator.
BoolCircuit build_a2y_circuit(std::size_t word_bits = 32, std::size_t frac_bits = 12,
                              std::size_t pre_shift = 0);

/// 128-bit keyed hash H(A, B, tweak) = AES_k(K) ^ K with K = 2A ^ 4B ^ tweak.
class Hasher {
 public:
  explicit Hasher(const Label& key);
  ~Hasher();
  Hasher(const Hasher&) = delete;
  Hasher& operator=(const Hasher&) = delete;

  Label operator()(const Label& a, const Label& b, std::uint64_t tweak) const;
  /// Four hashes in one cipher call.
  void hash4(const std::array<Label, 4>& a, const std::array<Label, 4>& b, std::uint64_t tweak,
             std::array<Label, 4>& out) const;
  std::uint64_t calls() const { return calls_; }

 private:
  void encrypt(std::span<const Label> in, std::span<Label> out) const;

  struct Impl;
  std::unique_ptr<Impl> impl_;
  mutable std::uint64_t calls_ = 0;
};

struct OutputDecoder {
  bool point = false;  // point bit of the 0-label
  Label digest0;       // H(label0) for fault detection
  Label digest1;
};

struct GarbledCircuit {
  std::shared_ptr<const BoolCircuit> circuit;
  std::vector<std::array<Label, 4>> and_tables;  // in gate order
  std::vector<Label> constant_labels;            // active labels for circuit->constants
  std::vector<OutputDecoder> output_decode;
  Label hash_key;

  std::size_t ciphertext_count() const { return 4 * and_tables.size(); }
  std::size_t table_bytes() const { return ciphertext_count() * 16; }
};

struct Garbling {
  GarbledCircuit gc;
  std::vector<LabelPair> garbler_input_pairs;
  std::vector<LabelPair> evaluator_input_pairs;
  Label delta;
  std::uint64_t hash_calls = 0;
};

/// Deterministic given the circuit and the 128-bit seed.
Garbling garble(std::shared_ptr<const BoolCircuit> circuit, const Block& seed);

std::vector<Label> select_labels(std::span<const LabelPair> pairs, const std::vector<bool>& bits);

struct EvaluationTrace {
  std::size_t row_decryptions = 0;
  std::vector<std::size_t> rows_per_and_gate;
  std::vector<Label> wire_labels;  // label observed on every wire
  std::uint64_t hash_calls = 0;
};

/// Called with (AND-gate ordinal, row) right before the evaluator uses that
/// row; lets the simulator model in-memory corruption of garbled tables.
using RowTap = std::function<void(std::size_t, Label&)>;

/// Evaluates on one label per input wire; returns the output-wire labels.
std::vector<Label> evaluate_labels(const GarbledCircuit& gc, std::span<const Label> garbler_labels,
                                   std::span<const Label> evaluator_labels,
                                   EvaluationTrace* trace = nullptr, const RowTap& tap = {});
/// Throws GcEvaluationFault when an output label matches neither committed label.
std::vector<bool> decode_outputs(const GarbledCircuit& gc, std::span<const Label> output_labels,
                                 std::uint64_t* hash_calls = nullptr);

/// evaluate_labels followed by decode_outputs.
std::vector<bool> evaluate(const GarbledCircuit& gc, std::span<const Label> garbler_labels,
                           std::span<const Label> evaluator_labels, EvaluationTrace* trace = nullptr,
                           const RowTap& tap = {});

/// Ideal 1-out-of-2 oblivious transfer functionality with release accounting.
class IdealOt {
 public:
  std::vector<Label> transfer(std::span<const LabelPair> pairs, const std::vector<bool>& choices);

  std::size_t released_labels() const { return released_; }
  std::size_t transfers() const { return transfers_; }
  /// True iff no call ever handed out both labels of a pair.
  bool complementary_never_released() const { return !double_release_; }

 private:
  std::size_t released_ = 0;
  std::size_t transfers_ = 0;
  bool double_release_ = false;
  // Keyed by the pair's 0-label; bit b set once label(b) was handed out.
  std::map<std::pair<std::uint64_t, std::uint64_t>, std::uint8_t> released_mask_;
};

struct A2YAccounting {
  std::size_t host_stored_labels = 0;            // label pairs kept for OT
  std::size_t evaluator_labels_transferred = 0;  // via OT
  std::size_t garbler_labels_sent = 0;
  std::size_t and_gates = 0;
  std::size_t table_bytes = 0;
  std::uint64_t garbler_hash_calls = 0;
  std::uint64_t evaluator_hash_calls = 0;

  A2YAccounting& operator+=(const A2YAccounting& o);
};

/// Arithmetic-to-Yao switch for one shared scalar followed by the sigmoid
/// clamp. The host garbles with its share hardwired as garbler input; the
/// device receives labels for its share through the ideal OT and evaluates.
class A2YSwitch {
 public:
  explicit A2YSwitch(std::size_t word_bits = 32, std::size_t frac_bits = 12,
                     std::size_t pre_shift = 0);

  struct HostSide {
    Garbling garbling;
    std::vector<Label> garbler_labels;  // active labels for the host share
  };

  HostSide garble_for(Word host_share, const Block& seed) const;
  /// Device side: obtains labels via `ot`, evaluates, returns the revealed word.
  Word evaluate(const HostSide& host, Word device_share, IdealOt& ot,
                EvaluationTrace* trace = nullptr, const RowTap& tap = {}) const;

  A2YAccounting accounting() const;
  const std::shared_ptr<const BoolCircuit>& circuit() const { return circuit_; }
  std::size_t word_bits() const { return word_bits_; }

 private:
  std::size_t word_bits_;
  std::shared_ptr<const BoolCircuit> circuit_;
};

}  // namespace pimsec::gc
