#include <openssl/evp.h>

#include <cstring>
#include <stdexcept>

#include "pimsec/errors.hpp"
#include "pimsec/gc.hpp"

namespace pimsec::gc {

namespace {

constexpr std::uint64_t kOutputTweak = std::uint64_t{1} << 63;

// multiplication by x in GF(2^128), reduction polynomial x^128 + x^7 + x^2 + x + 1
Label dbl(const Label& l) {
  const std::uint64_t carry = l.hi >> 63;
  return {(l.lo << 1) ^ (carry * 0x87), (l.hi << 1) | (l.lo >> 63)};
}

Label to_label(const Block& b) {
  Label l;
  std::memcpy(&l.lo, b.data(), 8);
  std::memcpy(&l.hi, b.data() + 8, 8);
  return l;
}

KeyBytes to_key(const Label& l) {
  KeyBytes k{};
  std::memcpy(k.data(), &l.lo, 8);
  std::memcpy(k.data() + 8, &l.hi, 8);
  return k;
}

// Seeded label source: AES_seed(counter).
std::vector<Label> draw_labels(const Block& seed, std::size_t count) {
  std::vector<Block> counters(count);
  for (std::size_t i = 0; i < count; ++i) counters[i] = counter_block(0, StreamId::share, i);
  std::vector<Block> out(count);
  Aes128Prp(seed).encrypt_blocks(counters, out);
  std::vector<Label> labels(count);
  for (std::size_t i = 0; i < count; ++i) labels[i] = to_label(out[i]);
  return labels;
}

}  // namespace

struct Hasher::Impl {
  EVP_CIPHER_CTX* ctx = nullptr;
  ~Impl() { EVP_CIPHER_CTX_free(ctx); }
};

Hasher::Hasher(const Label& key) : impl_(std::make_unique<Impl>()) {
  const KeyBytes k = to_key(key);
  impl_->ctx = EVP_CIPHER_CTX_new();
  if (!impl_->ctx || EVP_EncryptInit_ex(impl_->ctx, EVP_aes_128_ecb(), nullptr, k.data(), nullptr) != 1) {
    throw Error("Hasher: cipher initialisation failed");
  }
  EVP_CIPHER_CTX_set_padding(impl_->ctx, 0);
}

Hasher::~Hasher() = default;

void Hasher::encrypt(std::span<const Label> in, std::span<Label> out) const {
  static_assert(sizeof(Label) == 16);
  int written = 0;
  const int bytes = static_cast<int>(in.size() * sizeof(Label));
  if (EVP_EncryptUpdate(impl_->ctx, reinterpret_cast<unsigned char*>(out.data()), &written,
                        reinterpret_cast<const unsigned char*>(in.data()), bytes) != 1 ||
      written != bytes) {
    throw Error("Hasher: encryption failed");
  }
  calls_ += in.size();
}

Label Hasher::operator()(const Label& a, const Label& b, std::uint64_t tweak) const {
  Label k = dbl(a) ^ dbl(dbl(b));
  k.lo ^= tweak;
  Label e;
  encrypt(std::span<const Label>(&k, 1), std::span<Label>(&e, 1));
  return e ^ k;
}

void Hasher::hash4(const std::array<Label, 4>& a, const std::array<Label, 4>& b, std::uint64_t tweak,
                   std::array<Label, 4>& out) const {
  std::array<Label, 4> k;
  for (std::size_t i = 0; i < 4; ++i) {
    k[i] = dbl(a[i]) ^ dbl(dbl(b[i]));
    k[i].lo ^= tweak;
  }
  encrypt(k, out);
  for (std::size_t i = 0; i < 4; ++i) out[i] ^= k[i];
}

Garbling garble(std::shared_ptr<const BoolCircuit> circuit, const Block& seed) {
  const BoolCircuit& c = *circuit;
  const std::size_t and_gates = c.and_count();
  const std::size_t fresh_labels =
      2 + c.garbler_inputs.size() + c.evaluator_inputs.size() + c.constants.size() + and_gates;
  const std::vector<Label> pool = draw_labels(seed, fresh_labels);
  std::size_t next = 0;

  Garbling g;
  g.delta = pool[next++];
  g.delta.lo |= 1;
  g.gc.hash_key = pool[next++];
  g.gc.circuit = circuit;
  const Hasher hash(g.gc.hash_key);

  std::vector<Label> zero(c.wire_count);
  for (WireId w : c.garbler_inputs) {
    zero[w] = pool[next++];
    g.garbler_input_pairs.push_back({zero[w], zero[w] ^ g.delta});
  }
  for (WireId w : c.evaluator_inputs) {
    zero[w] = pool[next++];
    g.evaluator_input_pairs.push_back({zero[w], zero[w] ^ g.delta});
  }
  for (const auto& [w, v] : c.constants) {
    zero[w] = pool[next++];
    g.gc.constant_labels.push_back(v ? zero[w] ^ g.delta : zero[w]);
  }

  g.gc.and_tables.reserve(and_gates);
  for (std::size_t gi = 0; gi < c.gates.size(); ++gi) {
    const Gate& gate = c.gates[gi];
    switch (gate.kind) {
      case GateKind::XOR:
        zero[gate.out] = zero[gate.in0] ^ zero[gate.in1];
        break;
      case GateKind::NOT:
        zero[gate.out] = zero[gate.in0] ^ g.delta;
        break;
      case GateKind::AND: {
        const Label c0 = pool[next++];
        std::array<Label, 4> a_in, b_in, pads;
        for (int a = 0; a < 2; ++a) {
          for (int b = 0; b < 2; ++b) {
            a_in[2 * a + b] = a ? zero[gate.in0] ^ g.delta : zero[gate.in0];
            b_in[2 * a + b] = b ? zero[gate.in1] ^ g.delta : zero[gate.in1];
          }
        }
        hash.hash4(a_in, b_in, gi, pads);
        std::array<Label, 4> table;
        for (int a = 0; a < 2; ++a) {
          for (int b = 0; b < 2; ++b) {
            const Label& la = a_in[2 * a + b];
            const Label& lb = b_in[2 * a + b];
            const Label out = (a & b) ? c0 ^ g.delta : c0;
            table[2 * la.point() + lb.point()] = pads[2 * a + b] ^ out;
          }
        }
        zero[gate.out] = c0;
        g.gc.and_tables.push_back(table);
        break;
      }
    }
  }

  for (std::size_t i = 0; i < c.outputs.size(); ++i) {
    const Label& l0 = zero[c.outputs[i]];
    const Label l1 = l0 ^ g.delta;
    g.gc.output_decode.push_back({l0.point(), hash(l0, l0, kOutputTweak | i), hash(l1, l1, kOutputTweak | i)});
  }
  g.hash_calls = hash.calls();
  return g;
}

std::vector<Label> select_labels(std::span<const LabelPair> pairs, const std::vector<bool>& bits) {
  if (pairs.size() != bits.size()) throw DimensionError("select_labels: arity mismatch");
  std::vector<Label> out;
  out.reserve(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) out.push_back(pairs[i].select(bits[i]));
  return out;
}

std::vector<Label> evaluate_labels(const GarbledCircuit& gc, std::span<const Label> garbler_labels,
                                   std::span<const Label> evaluator_labels, EvaluationTrace* trace,
                                   const RowTap& tap) {
  const BoolCircuit& c = *gc.circuit;
  if (garbler_labels.size() != c.garbler_inputs.size() ||
      evaluator_labels.size() != c.evaluator_inputs.size()) {
    throw DimensionError("evaluate: one label per input wire required");
  }
  if (gc.and_tables.size() != c.and_count() || gc.constant_labels.size() != c.constants.size() ||
      gc.output_decode.size() != c.outputs.size()) {
    throw GcEvaluationFault("garbled material does not match circuit shape");
  }
  const Hasher hash(gc.hash_key);

  std::vector<Label> label(c.wire_count);
  for (std::size_t i = 0; i < garbler_labels.size(); ++i) label[c.garbler_inputs[i]] = garbler_labels[i];
  for (std::size_t i = 0; i < evaluator_labels.size(); ++i) {
    label[c.evaluator_inputs[i]] = evaluator_labels[i];
  }
  for (std::size_t i = 0; i < c.constants.size(); ++i) label[c.constants[i].first] = gc.constant_labels[i];

  std::size_t and_index = 0;
  std::size_t decryptions = 0;
  if (trace) trace->rows_per_and_gate.assign(gc.and_tables.size(), 0);
  for (std::size_t gi = 0; gi < c.gates.size(); ++gi) {
    const Gate& gate = c.gates[gi];
    switch (gate.kind) {
      case GateKind::XOR:
        label[gate.out] = label[gate.in0] ^ label[gate.in1];
        break;
      case GateKind::NOT:
        label[gate.out] = label[gate.in0];
        break;
      case GateKind::AND: {
        const Label& a = label[gate.in0];
        const Label& b = label[gate.in1];
        Label row = gc.and_tables[and_index][2 * a.point() + b.point()];
        if (tap) tap(and_index, row);
        label[gate.out] = row ^ hash(a, b, gi);
        ++decryptions;
        if (trace) ++trace->rows_per_and_gate[and_index];
        ++and_index;
        break;
      }
    }
  }

  std::vector<Label> out(c.outputs.size());
  for (std::size_t i = 0; i < c.outputs.size(); ++i) out[i] = label[c.outputs[i]];
  if (trace) {
    trace->row_decryptions += decryptions;
    trace->wire_labels = std::move(label);
    trace->hash_calls += hash.calls();
  }
  return out;
}

std::vector<bool> decode_outputs(const GarbledCircuit& gc, std::span<const Label> output_labels,
                                 std::uint64_t* hash_calls) {
  if (output_labels.size() != gc.output_decode.size()) {
    throw GcEvaluationFault("wrong number of output labels");
  }
  const Hasher hash(gc.hash_key);
  std::vector<bool> out(output_labels.size());
  for (std::size_t i = 0; i < output_labels.size(); ++i) {
    const Label& l = output_labels[i];
    const OutputDecoder& d = gc.output_decode[i];
    const bool bit = l.point() != d.point;
    if (hash(l, l, kOutputTweak | i) != (bit ? d.digest1 : d.digest0)) {
      throw GcEvaluationFault("output label " + std::to_string(i) + " matches no committed label");
    }
    out[i] = bit;
  }
  if (hash_calls) *hash_calls += hash.calls();
  return out;
}

std::vector<bool> evaluate(const GarbledCircuit& gc, std::span<const Label> garbler_labels,
                           std::span<const Label> evaluator_labels, EvaluationTrace* trace,
                           const RowTap& tap) {
  const std::vector<Label> labels = evaluate_labels(gc, garbler_labels, evaluator_labels, trace, tap);
  return decode_outputs(gc, labels, trace ? &trace->hash_calls : nullptr);
}

std::vector<Label> IdealOt::transfer(std::span<const LabelPair> pairs, const std::vector<bool>& choices) {
  if (pairs.size() != choices.size()) throw DimensionError("ot: one choice bit per wire required");
  ++transfers_;
  std::vector<Label> out;
  out.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    out.push_back(pairs[i].select(choices[i]));
    auto& mask = released_mask_[{pairs[i].zero.lo, pairs[i].zero.hi}];
    mask |= static_cast<std::uint8_t>(choices[i] ? 2 : 1);
    if (mask == 3) double_release_ = true;
  }
  released_ += out.size();
  return out;
}

A2YAccounting& A2YAccounting::operator+=(const A2YAccounting& o) {
  host_stored_labels += o.host_stored_labels;
  evaluator_labels_transferred += o.evaluator_labels_transferred;
  garbler_labels_sent += o.garbler_labels_sent;
  and_gates += o.and_gates;
  table_bytes += o.table_bytes;
  garbler_hash_calls += o.garbler_hash_calls;
  evaluator_hash_calls += o.evaluator_hash_calls;
  return *this;
}

A2YSwitch::A2YSwitch(std::size_t word_bits, std::size_t frac_bits, std::size_t pre_shift)
    : word_bits_(word_bits),
      circuit_(std::make_shared<const BoolCircuit>(build_a2y_circuit(word_bits, frac_bits, pre_shift))) {}

A2YSwitch::HostSide A2YSwitch::garble_for(Word host_share, const Block& seed) const {
  HostSide host{garble(circuit_, seed), {}};
  const std::vector<bool> bits = word_to_bits(host_share, word_bits_);
  host.garbler_labels = select_labels(host.garbling.garbler_input_pairs, bits);
  return host;
}

Word A2YSwitch::evaluate(const HostSide& host, Word device_share, IdealOt& ot, EvaluationTrace* trace,
                         const RowTap& tap) const {
  const std::vector<bool> choices = word_to_bits(device_share, word_bits_);
  const std::vector<Label> labels = ot.transfer(host.garbling.evaluator_input_pairs, choices);
  const std::vector<bool> out = gc::evaluate(host.garbling.gc, host.garbler_labels, labels, trace, tap);
  return bits_to_word(out);
}

A2YAccounting A2YSwitch::accounting() const {
  A2YAccounting a;
  a.host_stored_labels = 2 * circuit_->evaluator_inputs.size();
  a.evaluator_labels_transferred = circuit_->evaluator_inputs.size();
  a.garbler_labels_sent = circuit_->garbler_inputs.size();
  a.and_gates = circuit_->and_count();
  a.table_bytes = 16 * 4 * a.and_gates;
  return a;
}

}  // namespace pimsec::gc
