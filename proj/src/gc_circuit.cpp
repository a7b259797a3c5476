#include <stdexcept>

#include "pimsec/errors.hpp"
#include "pimsec/gc.hpp"

namespace pimsec::gc {

std::size_t BoolCircuit::and_count() const {
  std::size_t n = 0;
  for (const Gate& g : gates) n += g.kind == GateKind::AND ? 1 : 0;
  return n;
}

void BoolCircuit::validate() const {
  std::vector<bool> defined(wire_count, false);
  auto define = [&](WireId w) {
    if (w >= wire_count) throw std::logic_error("circuit wire id out of range");
    if (defined[w]) throw std::logic_error("circuit wire defined twice");
    defined[w] = true;
  };
  for (WireId w : garbler_inputs) define(w);
  for (WireId w : evaluator_inputs) define(w);
  for (const auto& [w, v] : constants) define(w);
  for (const Gate& g : gates) {
    if (g.in0 >= wire_count || !defined[g.in0]) throw std::logic_error("gate reads undefined wire");
    if (g.kind != GateKind::NOT && (g.in1 >= wire_count || !defined[g.in1])) {
      throw std::logic_error("gate reads undefined wire");
    }
    define(g.out);
  }
  for (WireId w : outputs) {
    if (w >= wire_count || !defined[w]) throw std::logic_error("output wire undefined");
  }
}

std::vector<bool> BoolCircuit::evaluate_plain(const std::vector<bool>& garbler_bits,
                                              const std::vector<bool>& evaluator_bits) const {
  if (garbler_bits.size() != garbler_inputs.size() ||
      evaluator_bits.size() != evaluator_inputs.size()) {
    throw DimensionError("evaluate_plain: input arity mismatch");
  }
  std::vector<bool> value(wire_count, false);
  for (std::size_t i = 0; i < garbler_inputs.size(); ++i) value[garbler_inputs[i]] = garbler_bits[i];
  for (std::size_t i = 0; i < evaluator_inputs.size(); ++i) {
    value[evaluator_inputs[i]] = evaluator_bits[i];
  }
  for (const auto& [w, v] : constants) value[w] = v;
  for (const Gate& g : gates) {
    switch (g.kind) {
      case GateKind::XOR: value[g.out] = value[g.in0] != value[g.in1]; break;
      case GateKind::AND: value[g.out] = value[g.in0] && value[g.in1]; break;
      case GateKind::NOT: value[g.out] = !value[g.in0]; break;
    }
  }
  std::vector<bool> out;
  out.reserve(outputs.size());
  for (WireId w : outputs) out.push_back(value[w]);
  return out;
}

WireId CircuitBuilder::fresh() { return static_cast<WireId>(circuit_.wire_count++); }

CircuitBuilder::Bits CircuitBuilder::garbler_input(std::size_t n) {
  Bits bits(n);
  for (auto& b : bits) {
    const WireId w = fresh();
    circuit_.garbler_inputs.push_back(w);
    b.wire = w;
  }
  return bits;
}

CircuitBuilder::Bits CircuitBuilder::evaluator_input(std::size_t n) {
  Bits bits(n);
  for (auto& b : bits) {
    const WireId w = fresh();
    circuit_.evaluator_inputs.push_back(w);
    b.wire = w;
  }
  return bits;
}

CircuitBuilder::Bit CircuitBuilder::XOR(Bit a, Bit b) {
  if (a.is_const() && b.is_const()) return constant(a.value != b.value);
  if (a.is_const()) std::swap(a, b);
  if (b.is_const()) return b.value ? NOT(a) : a;
  if (a.wire == b.wire) return constant(false);
  const WireId out = fresh();
  circuit_.gates.push_back({GateKind::XOR, static_cast<WireId>(a.wire), static_cast<WireId>(b.wire), out});
  return Bit{out, false};
}

CircuitBuilder::Bit CircuitBuilder::AND(Bit a, Bit b) {
  if (a.is_const() && b.is_const()) return constant(a.value && b.value);
  if (a.is_const()) std::swap(a, b);
  if (b.is_const()) return b.value ? a : constant(false);
  if (a.wire == b.wire) return a;
  const WireId out = fresh();
  circuit_.gates.push_back({GateKind::AND, static_cast<WireId>(a.wire), static_cast<WireId>(b.wire), out});
  return Bit{out, false};
}

CircuitBuilder::Bit CircuitBuilder::NOT(Bit a) {
  if (a.is_const()) return constant(!a.value);
  const WireId out = fresh();
  circuit_.gates.push_back({GateKind::NOT, static_cast<WireId>(a.wire), 0, out});
  return Bit{out, false};
}

CircuitBuilder::Bits CircuitBuilder::add(const Bits& a, const Bits& b) {
  if (a.size() != b.size()) throw DimensionError("adder operand widths differ");
  Bits sum(a.size());
  Bit carry = constant(false);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Bit axc = XOR(a[i], carry);
    const Bit bxc = XOR(b[i], carry);
    sum[i] = XOR(axc, b[i]);
    if (i + 1 < a.size()) carry = XOR(carry, AND(axc, bxc));
  }
  return sum;
}

CircuitBuilder::Bits CircuitBuilder::sub(const Bits& a, const Bits& b) {
  if (a.size() != b.size()) throw DimensionError("subtractor operand widths differ");
  // a + ~b + 1
  Bits sum(a.size());
  Bit carry = constant(true);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Bit nb = NOT(b[i]);
    const Bit axc = XOR(a[i], carry);
    const Bit bxc = XOR(nb, carry);
    sum[i] = XOR(axc, nb);
    if (i + 1 < a.size()) carry = XOR(carry, AND(axc, bxc));
  }
  return sum;
}

CircuitBuilder::Bits CircuitBuilder::word(Word value, std::size_t n) {
  Bits bits(n);
  for (std::size_t i = 0; i < n; ++i) bits[i] = constant(i < 32 && ((value >> i) & 1u) != 0);
  return bits;
}

CircuitBuilder::Bits CircuitBuilder::shift_right_arith(const Bits& a, std::size_t shift) {
  Bits out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i] = i + shift < a.size() ? a[i + shift] : a.back();
  }
  return out;
}

BoolCircuit CircuitBuilder::build(const Bits& outputs) {
  BoolCircuit c = circuit_;
  for (const Bit& b : outputs) {
    if (b.is_const()) {
      const WireId w = static_cast<WireId>(c.wire_count++);
      c.constants.emplace_back(w, b.value);
      c.outputs.push_back(w);
    } else {
      c.outputs.push_back(static_cast<WireId>(b.wire));
    }
  }
  // drop gates that cannot reach an output
  std::vector<bool> live(c.wire_count, false);
  for (WireId w : c.outputs) live[w] = true;
  std::vector<Gate> kept;
  for (auto it = c.gates.rbegin(); it != c.gates.rend(); ++it) {
    if (!live[it->out]) continue;
    live[it->in0] = true;
    if (it->kind != GateKind::NOT) live[it->in1] = true;
    kept.push_back(*it);
  }
  c.gates.assign(kept.rbegin(), kept.rend());
  c.validate();
  return c;
}

std::vector<bool> word_to_bits(Word w, std::size_t n) {
  std::vector<bool> bits(n);
  for (std::size_t i = 0; i < n; ++i) bits[i] = i < 32 && ((w >> i) & 1u) != 0;
  return bits;
}

Word bits_to_word(const std::vector<bool>& bits) {
  Word w = 0;
  for (std::size_t i = 0; i < bits.size() && i < 32; ++i) w |= Word{bits[i]} << i;
  return w;
}

namespace {

// clamp(x + 1/2, 0, 1) on a two's-complement Q word.
//
// b1 = "x + 1/2 < 0" and b2 = "x - 1/2 < 0"; the ring sign bits of x +/- HALF
// only give that for inputs away from the wrap boundary, so both are gated
// by the sign of x itself:
//   b1 = msb(x) & msb(x + HALF)
//   b2 = msb(x) | msb(x - HALF)
// out_i = (~b2 & ONE_i) ^ (b2 & ~b1 & v_i), v = x + HALF; the two branches
// are mutually exclusive so XOR realises their sum.
CircuitBuilder::Bits sigmoid_bits(CircuitBuilder& cb, const CircuitBuilder::Bits& x,
                                  std::size_t frac_bits) {
  const std::size_t n = x.size();
  const Word half = Word{1} << (frac_bits - 1);
  const Word one = Word{1} << frac_bits;

  const auto v = cb.add(x, CircuitBuilder::word(half, n));
  const auto w = cb.sub(x, CircuitBuilder::word(half, n));
  const auto sx = x.back();
  const auto b1 = cb.AND(sx, v.back());
  const auto b2 = cb.XOR(cb.XOR(sx, w.back()), cb.AND(sx, w.back()));
  const auto not_b2 = cb.NOT(b2);
  const auto middle = cb.AND(b2, cb.NOT(b1));

  const auto ones = CircuitBuilder::word(one, n);
  CircuitBuilder::Bits out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = cb.XOR(cb.AND(not_b2, ones[i]), cb.AND(middle, v[i]));
  }
  return out;
}

}  // namespace

BoolCircuit build_add_mod_circuit(std::size_t word_bits) {
  CircuitBuilder cb;
  const auto r = cb.garbler_input(word_bits);
  const auto c = cb.evaluator_input(word_bits);
  return cb.build(cb.add(r, c));
}

BoolCircuit build_sign_compare_circuit(std::size_t word_bits) {
  CircuitBuilder cb;
  const auto a = cb.garbler_input(word_bits);
  const auto b = cb.evaluator_input(word_bits);
  return cb.build({cb.sub(a, b).back()});
}

BoolCircuit build_sigmoid_circuit(std::size_t word_bits, std::size_t frac_bits) {
  if (frac_bits == 0 || frac_bits + 1 >= word_bits) throw std::invalid_argument("bad fixed-point format");
  CircuitBuilder cb;
  const auto x = cb.evaluator_input(word_bits);
  return cb.build(sigmoid_bits(cb, x, frac_bits));
}

BoolCircuit build_a2y_circuit(std::size_t word_bits, std::size_t frac_bits, std::size_t pre_shift) {
  if (frac_bits == 0 || frac_bits + 1 >= word_bits) throw std::invalid_argument("bad fixed-point format");
  CircuitBuilder cb;
  const auto r = cb.garbler_input(word_bits);
  const auto c = cb.evaluator_input(word_bits);
  const auto x = CircuitBuilder::shift_right_arith(cb.add(r, c), pre_shift);
  return cb.build(sigmoid_bits(cb, x, frac_bits));
}

}  // namespace pimsec::gc
