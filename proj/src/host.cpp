#include "pimsec/host.hpp"

#include "pimsec/errors.hpp"

namespace pimsec {

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::cpu_insecure: return "cpu_insecure";
    case Scheme::cpu_secure: return "cpu_secure";
    case Scheme::pim_insecure: return "pim_insecure";
    case Scheme::pim_enc_dec: return "pim_enc_dec";
    case Scheme::pim_runtime: return "pim_runtime";
    case Scheme::pim_precompute: return "pim_precompute";
  }
  return "?";
}

std::string_view to_string(Variant v) { return v == Variant::A ? "A" : "A2Y"; }

Scheme parse_scheme(std::string_view s) {
  for (Scheme k : kAllSchemes) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("unknown scheme '" + std::string(s) + "'");
}

Variant parse_variant(std::string_view s) {
  if (s == "A") return Variant::A;
  if (s == "A2Y") return Variant::A2Y;
  throw ConfigError("unknown variant '" + std::string(s) + "'");
}

bool uses_device(Scheme s) { return s != Scheme::cpu_insecure && s != Scheme::cpu_secure; }

bool is_secure(Scheme s) { return s != Scheme::cpu_insecure && s != Scheme::pim_insecure; }

namespace {

KeyBytes key_from_seed(std::mt19937_64& rng) {
  KeyBytes k{};
  for (std::size_t i = 0; i < 2; ++i) {
    const std::uint64_t r = rng();
    for (std::size_t b = 0; b < 8; ++b) k[8 * i + b] = static_cast<std::uint8_t>(r >> (8 * b));
  }
  return k;
}

Block block_from(std::mt19937_64& rng) {
  Block b{};
  for (std::size_t i = 0; i < 2; ++i) {
    const std::uint64_t r = rng();
    for (std::size_t k = 0; k < 8; ++k) b[8 * i + k] = static_cast<std::uint8_t>(r >> (8 * k));
  }
  return b;
}

std::span<const Word> words(const RingVector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

std::uint64_t mn(Eigen::Index m, Eigen::Index n) { return static_cast<std::uint64_t>(m) * static_cast<std::uint64_t>(n); }

RingVector flatten(const RingMatrix& m) {
  return Eigen::Map<const RingVector>(m.data(), m.size());
}

RingMatrix unflatten(const RingVector& v, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const RingMatrix>(v.data(), rows, cols);
}

RingVector labels_to_words(const std::vector<gc::Label>& labels) {
  RingVector w(static_cast<Eigen::Index>(4 * labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(4 * i);
    w[k] = static_cast<Word>(labels[i].lo);
    w[k + 1] = static_cast<Word>(labels[i].lo >> 32);
    w[k + 2] = static_cast<Word>(labels[i].hi);
    w[k + 3] = static_cast<Word>(labels[i].hi >> 32);
  }
  return w;
}

std::vector<gc::Label> words_to_labels(const RingVector& w) {
  std::vector<gc::Label> labels(static_cast<std::size_t>(w.size()) / 4);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(4 * i);
    labels[i].lo = std::uint64_t{w[k]} | (std::uint64_t{w[k + 1]} << 32);
    labels[i].hi = std::uint64_t{w[k + 2]} | (std::uint64_t{w[k + 3]} << 32);
  }
  return labels;
}

}  // namespace

Host::Host(SchemeConfig cfg, std::uint64_t seed, DeviceTopology topo)
    : cfg_(cfg), dealer_(keys_), rng_(seed) {
  key_ = keys_.register_key(key_from_seed(rng_));
  tamper_ = TamperController(rng_());
  if (uses_device(cfg_.scheme)) device_ = std::make_unique<Device>(topo, costs_, tamper_, is_secure(cfg_.scheme));
  if (cfg_.variant == Variant::A2Y) a2y_ = std::make_unique<gc::A2YSwitch>(kWordBits, kFracBits, kFracBits);
}

Host::~Host() = default;

OtpContext Host::fresh_ctx() { return {key_, next_version_++, 0}; }

Host::Entry& Host::entry(MatrixId id) {
  if (id >= entries_.size()) throw IndexError("unknown matrix id");
  return entries_[id];
}

Device& Host::dev() {
  if (!device_) throw ConfigError(std::string(to_string(cfg_.scheme)) + " has no device");
  return *device_;
}

RingVector Host::otp(const OtpContext& ctx, std::size_t count, StreamId stream) {
  costs_.current().host_prf_calls += blocks_spanned(ctx.base_index, count);
  return otp_words(keys_, ctx, count, stream);
}

RingMatrix Host::host_share_of(const Entry& e) {
  if (e.pads) return *e.pads;
  return unflatten(otp(*e.share_ctx, mn(e.rows, e.cols)), e.rows, e.cols);
}

RingMatrix Host::plaintext_of(const Entry& e) {
  if (cfg_.scheme == Scheme::cpu_secure && e.is_private) {
    return unflatten(open_host(*e.seal_ctx, flatten(e.host_sealed)), e.rows, e.cols);
  }
  return e.host_plain;
}

RingVector Host::seal_host(const OtpContext& ctx, const RingVector& v) {
  costs_.current().host_prf_calls += blocks_spanned(ctx.base_index, static_cast<std::size_t>(v.size()));
  return seal(keys_, ctx, v);
}

RingVector Host::open_host(const OtpContext& ctx, const RingVector& v) {
  costs_.current().host_prf_calls += blocks_spanned(ctx.base_index, static_cast<std::size_t>(v.size()));
  return open(keys_, ctx, v);
}

RingVector Host::cpu_secure_roundtrip(const RingVector& v) {
  const OtpContext ctx = fresh_ctx();
  return open_host(ctx, seal_host(ctx, v));
}

Host::SealedTags Host::make_tags(const RingMatrix& m, TagAxis axis) {
  PhaseGuard offline(costs_, Phase::offline);
  SealedTags t;
  t.ctx = fresh_ctx();
  t.axis = axis;
  costs_.current().host_prf_calls += 1;  // s
  const std::uint64_t s = derive_mac_secret(keys_, t.ctx, kMacPrime);
  const VerificationTag tags = gen_tags(m, s, kMacPrime, axis);
  costs_.current().host_mac_ops += mn(m.rows(), m.cols());
  t.hashed_length = tags.hashed_length;
  costs_.current().host_prf_calls += blocks_spanned(t.ctx.base_index, 2 * tags.residues.size());
  t.sealed = seal_tags(keys_, t.ctx, tags);
  return t;
}

std::pair<std::vector<std::uint64_t>, std::uint64_t> Host::open_tags(const SealedTags& t) {
  costs_.current().host_prf_calls += 1 + blocks_spanned(t.ctx.base_index, static_cast<std::size_t>(t.sealed.size()));
  return {open_tag_residues(keys_, t.ctx, t.sealed, kMacPrime), derive_mac_secret(keys_, t.ctx, kMacPrime)};
}

void Host::record(std::string_view step, Verdict v) {
  log_.verifications.push_back({std::string(step), v});
  if (v == Verdict::fail) throw VerificationFailure(std::string(step), log_.verifications.size() - 1);
}

void Host::verify_linear(const std::optional<SealedTags>& tags, std::span<const Word> input, const RingVector& result,
                         std::string_view step) {
  if (!cfg_.verify) return;
  if (!tags) throw ConfigError("no tags for verification of " + std::string(step));
  const auto [residues, s] = open_tags(*tags);
  VerificationTag t;
  t.residues = residues;
  t.axis = tags->axis;
  t.hashed_length = tags->hashed_length;
  if (static_cast<std::size_t>(result.size()) != t.hashed_length) throw DimensionError("result length != tag length");
  const std::uint64_t ftag_e = tag_kernel_gemv(t, input);
  const std::uint64_t ftag_r = hash_result(words(result), s, kMacPrime);
  costs_.current().verify_ops += input.size() + static_cast<std::size_t>(result.size());
  record(step, verify(ftag_e, ftag_r));
}

void Host::declare_leak(const std::string& kind, std::uint64_t n) { log_.leaks[kind] += n; }

Host::MatrixId Host::register_public(const RingMatrix& w, std::string name) {
  Entry e;
  e.name = std::move(name);
  e.rows = w.rows();
  e.cols = w.cols();
  e.host_plain = w;
  if (cfg_.verify) e.col_tags = make_tags(w, TagAxis::columns);
  if (uses_device(cfg_.scheme)) e.handle = dev().load(w, Placement::row_split, DataClass::public_data, e.name);
  entries_.push_back(std::move(e));
  return entries_.size() - 1;
}

Host::MatrixId Host::register_private(const RingMatrix& x, std::string name, unsigned axes, Placement placement) {
  Entry e;
  e.name = std::move(name);
  e.is_private = true;
  e.rows = x.rows();
  e.cols = x.cols();
  if (cfg_.verify && (axes & kColumnTags)) e.col_tags = make_tags(x, TagAxis::columns);
  if (cfg_.verify && (axes & kRowTags)) e.row_tags = make_tags(x, TagAxis::rows);
  switch (cfg_.scheme) {
    case Scheme::cpu_insecure:
      e.host_plain = x;
      break;
    case Scheme::cpu_secure:
      e.seal_ctx = fresh_ctx();
      e.host_sealed = unflatten(seal_host(*e.seal_ctx, flatten(x)), x.rows(), x.cols());
      break;
    case Scheme::pim_insecure:
      e.handle = dev().load(x, placement, DataClass::private_plain, e.name);
      break;
    case Scheme::pim_enc_dec: {
      e.seal_ctx = fresh_ctx();
      const RingMatrix sealed = unflatten(seal_host(*e.seal_ctx, flatten(x)), x.rows(), x.cols());
      e.handle = dev().load(sealed, placement, DataClass::sealed, e.name);
      break;
    }
    case Scheme::pim_runtime:
    case Scheme::pim_precompute: {
      e.share_ctx = fresh_ctx();
      costs_.current().host_prf_calls += blocks_spanned(0, static_cast<std::size_t>(x.size()));
      const ShareMatrix sm = dealer_.split(x, *e.share_ctx);
      e.handle = dev().load(sm.cipher, placement, DataClass::cipher_share, e.name);
      break;
    }
  }
  entries_.push_back(std::move(e));
  return entries_.size() - 1;
}

void Host::plan_gemv_public(MatrixId id) {
  if (cfg_.scheme != Scheme::pim_precompute) throw ConfigError("planning is a pim_precompute step");
  Entry& e = entry(id);
  PhaseGuard offline(costs_, Phase::offline);
  Plan p;
  p.input_ctx = fresh_ctx();
  const RingVector r = otp(*p.input_ctx, static_cast<std::size_t>(e.cols));
  const RingVector res = e.host_plain * r;
  costs_.current().host_mac_ops += mn(e.rows, e.cols);
  p.seal_ctx = fresh_ctx();
  p.sealed_res = seal_host(p.seal_ctx, res);
  e.plans.push_back(std::move(p));
}

void Host::plan_gemv_private(MatrixId id, const RingVector& w) {
  if (cfg_.scheme != Scheme::pim_precompute) throw ConfigError("planning is a pim_precompute step");
  Entry& e = entry(id);
  if (w.size() != e.cols) throw DimensionError("plan operand length mismatch");
  PhaseGuard offline(costs_, Phase::offline);
  Plan p;
  const RingVector res = host_share_of(e) * w;
  costs_.current().host_mac_ops += mn(e.rows, e.cols);
  p.operand = w;
  p.seal_ctx = fresh_ctx();
  p.sealed_res = seal_host(p.seal_ctx, res);
  e.plans.push_back(std::move(p));
}

void Host::pregenerate_pads(MatrixId id) {
  if (cfg_.scheme != Scheme::pim_precompute) throw ConfigError("pad pregeneration is a pim_precompute step");
  Entry& e = entry(id);
  PhaseGuard offline(costs_, Phase::offline);
  e.pads = host_share_of(e);
}

Host::Plan Host::pop_plan(Entry& e) {
  if (e.plans.empty()) {
    throw ConfigError("pim_precompute: no precomputed result for '" + e.name +
                      "' (the operand must be static and planned offline)");
  }
  Plan p = std::move(e.plans.front());
  e.plans.pop_front();
  return p;
}

RingVector Host::open_plan(Plan& p, std::string_view step) {
  // the store lives in untrusted memory
  tamper_.try_apply(TamperTarget::precompute_store,
                    std::span<Word>(p.sealed_res.data(), static_cast<std::size_t>(p.sealed_res.size())),
                    "store:" + std::string(step));
  return open_host(p.seal_ctx, p.sealed_res);
}

RingVector Host::gemv_public(MatrixId id, const RingVector& x, std::string_view step, ShareMode mode) {
  Entry& e = entry(id);
  if (e.is_private) throw ConfigError("gemv_public on a private matrix");
  if (x.size() != e.cols) throw DimensionError("gemv: '" + e.name + "' expects " + std::to_string(e.cols) + " inputs");
  const std::string site(step);
  RingVector y;
  auto split = [&](const OtpContext& ctx) {
    costs_.current().host_prf_calls += blocks_spanned(ctx.base_index, static_cast<std::size_t>(x.size()));
    return mode == ShareMode::split ? dealer_.split(x, ctx) : dealer_.reshare(x, ctx);
  };
  switch (cfg_.scheme) {
    case Scheme::cpu_insecure:
      y = e.host_plain * x;
      costs_.current().host_mac_ops += mn(e.rows, e.cols);
      break;
    case Scheme::cpu_secure:
      y = e.host_plain * cpu_secure_roundtrip(x);
      costs_.current().host_mac_ops += mn(e.rows, e.cols);
      y = cpu_secure_roundtrip(y);
      break;
    case Scheme::pim_insecure: {
      const RingVector xd = dev().send(x, DataClass::private_plain, site, true);
      y = dev().gemv(*e.handle, xd, DataClass::private_plain);
      break;
    }
    case Scheme::pim_enc_dec: {
      const OtpContext in = fresh_ctx();
      const RingVector xd = dev().open_vector(keys_, in, dev().send(seal_host(in, x), DataClass::sealed, site, true));
      const OtpContext out = fresh_ctx();
      const RingVector sealed = dev().seal_vector(keys_, out, dev().gemv_local(*e.handle, xd));
      y = open_host(out, dev().gather(sealed, DataClass::sealed, site));
      break;
    }
    case Scheme::pim_runtime: {
      const ShareVector sv = split(fresh_ctx());
      const RingVector c = dev().send(sv.cipher, DataClass::cipher_share, site, true);
      const RingVector res_pim = dev().gemv(*e.handle, c, DataClass::cipher_share);
      const RingVector res_cpu = e.host_plain * otp(sv.ctx, static_cast<std::size_t>(x.size()));
      costs_.current().host_mac_ops += mn(e.rows, e.cols);
      y = res_pim + res_cpu;
      break;
    }
    case Scheme::pim_precompute: {
      Plan p = pop_plan(e);
      const ShareVector sv = split(*p.input_ctx);
      const RingVector c = dev().send(sv.cipher, DataClass::cipher_share, site, true);
      const RingVector res_pim = dev().gemv(*e.handle, c, DataClass::cipher_share);
      y = res_pim + open_plan(p, step);
      break;
    }
  }
  verify_linear(e.col_tags, words(x), y, step);
  return y;
}

RingVector Host::gemv_private(MatrixId id, const RingVector& w, std::string_view step) {
  Entry& e = entry(id);
  if (!e.is_private) throw ConfigError("gemv_private on a public matrix");
  if (w.size() != e.cols) throw DimensionError("gemv: '" + e.name + "' expects " + std::to_string(e.cols) + " inputs");
  const std::string site(step);
  RingVector y;
  switch (cfg_.scheme) {
    case Scheme::cpu_insecure:
      y = e.host_plain * w;
      costs_.current().host_mac_ops += mn(e.rows, e.cols);
      break;
    case Scheme::cpu_secure:
      y = plaintext_of(e) * w;
      costs_.current().host_mac_ops += mn(e.rows, e.cols);
      y = cpu_secure_roundtrip(y);
      break;
    case Scheme::pim_insecure:
      y = dev().gemv(*e.handle, dev().send(w, DataClass::public_data, site, true), DataClass::private_plain);
      break;
    case Scheme::pim_enc_dec: {
      const Device::Handle tmp = dev().open_copy(*e.handle, keys_, *e.seal_ctx);
      const RingVector local = dev().gemv_local(tmp, dev().send(w, DataClass::public_data, site, true));
      dev().release(tmp);
      const OtpContext out = fresh_ctx();
      y = open_host(out, dev().gather(dev().seal_vector(keys_, out, local), DataClass::sealed, site));
      break;
    }
    case Scheme::pim_runtime: {
      const RingVector res_pim =
          dev().gemv(*e.handle, dev().send(w, DataClass::public_data, site, true), DataClass::cipher_share);
      const RingVector res_cpu = host_share_of(e) * w;
      costs_.current().host_mac_ops += mn(e.rows, e.cols);
      y = res_pim + res_cpu;
      break;
    }
    case Scheme::pim_precompute: {
      Plan p = pop_plan(e);
      if (p.operand.size() != w.size() || p.operand != w) {
        throw ConfigError("pim_precompute: operand differs from the one planned for '" + e.name + "'");
      }
      const RingVector res_pim =
          dev().gemv(*e.handle, dev().send(w, DataClass::public_data, site, true), DataClass::cipher_share);
      y = res_pim + open_plan(p, step);
      break;
    }
  }
  verify_linear(e.col_tags, words(w), y, step);
  return y;
}

RingVector Host::gemv_private_t(MatrixId id, const RingVector& err, std::string_view step) {
  Entry& e = entry(id);
  if (!e.is_private) throw ConfigError("gemv_private_t on a public matrix");
  if (err.size() != e.rows) throw DimensionError("grad: '" + e.name + "' expects " + std::to_string(e.rows) + " rows");
  const std::string site(step);
  RingVector g;
  switch (cfg_.scheme) {
    case Scheme::cpu_insecure:
      g = e.host_plain.transpose() * err;
      costs_.current().host_mac_ops += mn(e.rows, e.cols);
      break;
    case Scheme::cpu_secure:
      g = plaintext_of(e).transpose() * err;
      costs_.current().host_mac_ops += mn(e.rows, e.cols);
      g = cpu_secure_roundtrip(g);
      break;
    case Scheme::pim_insecure:
      g = dev().grad(*e.handle, dev().send(err, DataClass::private_plain, site, false), DataClass::private_plain);
      break;
    case Scheme::pim_enc_dec: {
      const OtpContext in = fresh_ctx();
      const RingVector ed = dev().open_vector(keys_, in, dev().send(seal_host(in, err), DataClass::sealed, site, false));
      const Device::Handle tmp = dev().open_copy(*e.handle, keys_, *e.seal_ctx);
      const std::vector<RingVector> parts = dev().grad_partials(tmp, ed);
      dev().release(tmp);
      RingVector flat(e.cols * static_cast<Eigen::Index>(parts.size()));
      for (std::size_t d = 0; d < parts.size(); ++d) flat.segment(static_cast<Eigen::Index>(d) * e.cols, e.cols) = parts[d];
      const OtpContext out = fresh_ctx();
      flat = open_host(out, dev().gather(dev().seal_vector(keys_, out, flat), DataClass::sealed, site));
      g = RingVector::Zero(e.cols);
      for (std::size_t d = 0; d < parts.size(); ++d) g += flat.segment(static_cast<Eigen::Index>(d) * e.cols, e.cols);
      break;
    }
    case Scheme::pim_runtime: {
      declare_leak("regression_error", static_cast<std::uint64_t>(err.size()));
      const RingVector res_pim =
          dev().grad(*e.handle, dev().send(err, DataClass::revealed, site, false), DataClass::cipher_share);
      const RingVector res_cpu = host_share_of(e).transpose() * err;
      costs_.current().host_mac_ops += mn(e.rows, e.cols);
      g = res_pim + res_cpu;
      break;
    }
    case Scheme::pim_precompute:
      throw ConfigError("pim_precompute needs static public operands; the gradient operand changes every step");
  }
  verify_linear(e.row_tags, words(err), g, step);
  return g;
}

RingMatrix Host::embedding(MatrixId id, std::span<const std::uint32_t> ids, const RingVector& weights,
                           std::size_t batch, std::size_t pf, std::string_view step) {
  Entry& e = entry(id);
  if (!e.is_private) throw ConfigError("embedding on a public table");
  if (ids.size() != batch * pf || static_cast<std::size_t>(weights.size()) != ids.size()) {
    throw DimensionError("embedding: expected batch * pf ids and weights");
  }
  for (auto i : ids) {
    if (i >= e.rows) throw IndexError("embedding id " + std::to_string(i) + " out of range for '" + e.name + "'");
  }
  const std::string site(step);
  const auto reduce = [&](auto row_of) {
    RingMatrix out = RingMatrix::Zero(static_cast<Eigen::Index>(batch), e.cols);
    for (std::size_t k = 0; k < batch; ++k) {
      for (std::size_t j = 0; j < pf; ++j) {
        const std::size_t t = k * pf + j;
        out.row(static_cast<Eigen::Index>(k)) += weights[static_cast<Eigen::Index>(t)] * row_of(ids[t]);
      }
    }
    costs_.current().host_mac_ops += static_cast<std::uint64_t>(ids.size()) * static_cast<std::uint64_t>(e.cols);
    return out;
  };
  auto device_ids = [&]() {
    RingVector v(static_cast<Eigen::Index>(ids.size()));
    for (std::size_t i = 0; i < ids.size(); ++i) v[static_cast<Eigen::Index>(i)] = ids[i];
    const RingVector sent = dev().send(v, DataClass::revealed, site + ".ids", true);
    std::vector<std::uint32_t> out(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) out[i] = sent[static_cast<Eigen::Index>(i)];
    return out;
  };
  RingMatrix out;
  switch (cfg_.scheme) {
    case Scheme::cpu_insecure:
      out = reduce([&](std::uint32_t r) { return e.host_plain.row(r); });
      break;
    case Scheme::cpu_secure: {
      out = reduce([&](std::uint32_t r) -> RingVector {
        const auto cols = static_cast<std::size_t>(e.cols);
        OtpContext row_ctx = *e.seal_ctx;
        row_ctx.base_index += static_cast<std::uint64_t>(r) * cols;
        const RingVector sealed = e.host_sealed.row(r).transpose();
        return open_host(row_ctx, sealed).transpose();
      });
      out = unflatten(cpu_secure_roundtrip(flatten(out)), out.rows(), out.cols());
      break;
    }
    case Scheme::pim_insecure: {
      const auto dids = device_ids();
      const RingVector a = dev().send(weights, DataClass::public_data, site + ".weights", true);
      const RingMatrix local = dev().embedding_local(*e.handle, dids, a, batch, pf);
      out = unflatten(dev().gather(flatten(local), DataClass::private_plain, site), local.rows(), local.cols());
      break;
    }
    case Scheme::pim_enc_dec: {
      declare_leak("embedding_indices", ids.size());
      const auto dids = device_ids();
      const RingVector a = dev().send(weights, DataClass::public_data, site + ".weights", true);
      const Device::Handle tmp = dev().open_copy(*e.handle, keys_, *e.seal_ctx);
      const RingMatrix local = dev().embedding_local(tmp, dids, a, batch, pf);
      dev().release(tmp);
      const OtpContext o = fresh_ctx();
      const RingVector back = dev().gather(dev().seal_vector(keys_, o, flatten(local)), DataClass::sealed, site);
      out = unflatten(open_host(o, back), local.rows(), local.cols());
      break;
    }
    case Scheme::pim_runtime:
    case Scheme::pim_precompute: {
      declare_leak("embedding_indices", ids.size());
      const auto dids = device_ids();
      const RingVector a = dev().send(weights, DataClass::public_data, site + ".weights", true);
      const RingMatrix local = dev().embedding_local(*e.handle, dids, a, batch, pf);
      const RingMatrix res_pim =
          unflatten(dev().gather(flatten(local), DataClass::cipher_share, site), local.rows(), local.cols());
      RingMatrix res_cpu;
      if (e.pads) {
        res_cpu = reduce([&](std::uint32_t r) { return e.pads->row(r); });
      } else {
        res_cpu = reduce([&](std::uint32_t r) -> RingVector {
          OtpContext row_ctx = *e.share_ctx;
          row_ctx.base_index += static_cast<std::uint64_t>(r) * static_cast<std::uint64_t>(e.cols);
          return otp(row_ctx, static_cast<std::size_t>(e.cols)).transpose();
        });
      }
      out = res_pim + res_cpu;
      break;
    }
  }
  if (cfg_.verify) {
    if (!e.row_tags) throw ConfigError("no row tags for verification of " + site);
    const auto [residues, s] = open_tags(*e.row_tags);
    Verdict verdict = Verdict::pass;
    for (std::size_t k = 0; k < batch; ++k) {
      std::uint64_t ftag_e = 0;
      for (std::size_t j = 0; j < pf; ++j) {
        const std::size_t t = k * pf + j;
        ftag_e = mod_add(ftag_e, mod_mul(residues[ids[t]], lift(weights[static_cast<Eigen::Index>(t)], kMacPrime), kMacPrime),
                         kMacPrime);
      }
      const RingVector row = out.row(static_cast<Eigen::Index>(k)).transpose();
      if (verify(ftag_e, hash_result(words(row), s, kMacPrime)) == Verdict::fail) verdict = Verdict::fail;
      costs_.current().verify_ops += pf + static_cast<std::uint64_t>(e.cols);
    }
    record(step, verdict);
  }
  return out;
}

RingVector Host::activation_a2y(MatrixId id, const RingVector& w, std::string_view step) {
  if (cfg_.scheme != Scheme::pim_runtime) {
    throw ConfigError("variant A2Y runs on pim_runtime only, not " + std::string(to_string(cfg_.scheme)));
  }
  if (!a2y_) a2y_ = std::make_unique<gc::A2YSwitch>(kWordBits, kFracBits, kFracBits);
  Entry& e = entry(id);
  if (!e.is_private) throw ConfigError("activation_a2y on a public matrix");
  if (w.size() != e.cols) throw DimensionError("a2y: '" + e.name + "' expects " + std::to_string(e.cols) + " inputs");
  const std::string site(step);

  // linear part: the device keeps its share of z = X w
  const RingVector z_dev = dev().gemv_local(*e.handle, dev().send(w, DataClass::public_data, site, true));
  const RingVector z_host = host_share_of(e) * w;
  costs_.current().host_mac_ops += mn(e.rows, e.cols);
  if (cfg_.verify) {
    const RingVector z_pim = dev().gather(z_dev, DataClass::cipher_share, site + ".dot");
    verify_linear(e.col_tags, words(w), (z_pim + z_host).eval(), step);
  }

  // nonlinear part, one switch per sample
  RingVector act(e.rows);
  const gc::A2YAccounting per_switch = a2y_->accounting();
  for (Eigen::Index i = 0; i < e.rows; ++i) {
    const gc::A2YSwitch::HostSide hs = a2y_->garble_for(z_host[i], block_from(rng_));
    const std::vector<gc::Label> ev_labels =
        ot_.transfer(hs.garbling.evaluator_input_pairs, gc::word_to_bits(z_dev[i], a2y_->word_bits()));
    gc::EvaluationTrace trace;
    const std::vector<gc::Label> out_labels = dev().evaluate_garbled(hs.garbling.gc, hs.garbler_labels, ev_labels, &trace);
    const RingVector back = dev().gather(labels_to_words(out_labels), DataClass::garbled, site + ".gc_out");
    act[i] = gc::bits_to_word(gc::decode_outputs(hs.garbling.gc, words_to_labels(back)));

    gc::A2YAccounting a = per_switch;
    a.garbler_hash_calls = hs.garbling.hash_calls;
    a.evaluator_hash_calls = trace.hash_calls;
    log_.a2y += a;
    ++log_.a2y_switches;
  }
  log_.ot_released_labels = ot_.released_labels();
  log_.ot_one_label_per_wire = ot_.complementary_never_released() &&
                               ot_.released_labels() == log_.a2y_switches * a2y_->word_bits();
  declare_leak("activation", static_cast<std::uint64_t>(e.rows));
  return act;
}

PrivateVector Host::store_private(const RingVector& v) {
  if (!is_secure(cfg_.scheme)) return {v, std::nullopt};
  const OtpContext ctx = fresh_ctx();
  costs_.current().host_prf_calls += blocks_spanned(ctx.base_index, static_cast<std::size_t>(v.size()));
  const ShareVector sv = dealer_.split(v, ctx);
  return {sv.cipher, ctx};
}

RingVector Host::load_private(const PrivateVector& v) {
  if (!v.ctx) return v.words;
  return v.words + otp(*v.ctx, static_cast<std::size_t>(v.words.size()));
}

}  // namespace pimsec
