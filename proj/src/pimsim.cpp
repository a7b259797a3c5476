#include "pimsec/pimsim.hpp"

#include <algorithm>
#include <charconv>

#include "pimsec/errors.hpp"

namespace pimsec {

void DeviceTopology::validate() const {
  if (dpu_count == 0) throw ConfigError("dpu_count must be at least 1");
  if (mram_bytes_per_dpu == 0) throw ConfigError("mram_bytes_per_dpu must be positive");
  if (tasklets_per_dpu == 0) throw ConfigError("tasklets_per_dpu must be at least 1");
}

std::string_view to_string(TamperTarget t) {
  switch (t) {
    case TamperTarget::resident_share: return "resident_share";
    case TamperTarget::channel_h2d: return "channel_h2d";
    case TamperTarget::channel_d2h: return "channel_d2h";
    case TamperTarget::device_result: return "device_result";
    case TamperTarget::gc_table: return "gc_table";
    case TamperTarget::precompute_store: return "precompute_store";
  }
  return "?";
}

std::string_view to_string(Mutation m) { return m == Mutation::bit_flip ? "bit_flip" : "word_randomize"; }

std::string_view to_string(DataClass c) {
  switch (c) {
    case DataClass::public_data: return "public";
    case DataClass::cipher_share: return "cipher_share";
    case DataClass::sealed: return "sealed";
    case DataClass::garbled: return "garbled";
    case DataClass::revealed: return "revealed";
    case DataClass::private_plain: return "private_plain";
  }
  return "?";
}

TamperTarget parse_tamper_target(std::string_view s) {
  for (auto t : {TamperTarget::resident_share, TamperTarget::channel_h2d, TamperTarget::channel_d2h,
                 TamperTarget::device_result, TamperTarget::gc_table, TamperTarget::precompute_store}) {
    if (to_string(t) == s) return t;
  }
  throw ConfigError("unknown tamper target '" + std::string(s) + "'");
}

TamperSpec TamperSpec::parse(std::string_view text) {
  TamperSpec spec;
  std::vector<std::string_view> parts;
  while (true) {
    const auto colon = text.find(':');
    parts.push_back(text.substr(0, colon));
    if (colon == std::string_view::npos) break;
    text.remove_prefix(colon + 1);
  }
  if (parts.size() > 3) throw ConfigError("tamper spec has too many fields");
  spec.target = parse_tamper_target(parts[0]);
  if (parts.size() > 1 && parts[1] != "random") {
    std::uint64_t pos = 0;
    const auto* end = parts[1].data() + parts[1].size();
    const auto [ptr, ec] = std::from_chars(parts[1].data(), end, pos);
    if (ec != std::errc{} || ptr != end) throw ConfigError("bad tamper position '" + std::string(parts[1]) + "'");
    spec.position = pos;
  }
  if (parts.size() > 2) {
    if (parts[2] == "bit_flip") {
      spec.mutation = Mutation::bit_flip;
    } else if (parts[2] == "word_randomize") {
      spec.mutation = Mutation::word_randomize;
    } else {
      throw ConfigError("unknown mutation '" + std::string(parts[2]) + "'");
    }
  }
  return spec;
}

std::string TamperSpec::str() const {
  std::string s(to_string(target));
  s += ':';
  s += position ? std::to_string(*position) : "random";
  s += ':';
  s += to_string(mutation);
  return s;
}

void TamperController::arm(const TamperSpec& spec) {
  spec_ = spec;
  fired_ = false;
}

std::uint64_t TamperController::pick_position(std::uint64_t extent) {
  if (spec_->position) return *spec_->position % extent;
  return std::uniform_int_distribution<std::uint64_t>(0, extent - 1)(rng_);
}

Word TamperController::mutate(Word w) {
  if (spec_->mutation == Mutation::bit_flip) {
    const auto bit = static_cast<unsigned>(rng_() % kWordBits);
    return w ^ (Word{1} << bit);
  }
  Word nw = w;
  while (nw == w) nw = static_cast<Word>(rng_());
  return nw;
}

bool TamperController::try_apply(TamperTarget t, std::span<Word> words, std::string_view site) {
  if (!pending(t) || words.empty()) return false;
  const std::uint64_t idx = pick_position(words.size());
  TamperRecord rec{*spec_, std::string(site), idx, words[idx], 0};
  words[idx] = mutate(words[idx]);
  rec.after = words[idx];
  log_.push_back(std::move(rec));
  fired_ = true;
  return true;
}

gc::RowTap TamperController::gc_tap(std::size_t and_count, std::string_view site) {
  if (!pending(TamperTarget::gc_table) || and_count == 0) return {};
  const std::uint64_t pos = pick_position(4 * and_count);
  const std::size_t gate = pos % and_count;
  const std::size_t word = (pos / and_count) % 4;
  return [this, gate, word, pos, site = std::string(site)](std::size_t idx, gc::Label& row) {
    if (idx != gate || fired_) return;
    std::uint64_t& half = word < 2 ? row.lo : row.hi;
    const unsigned shift = (word % 2) * 32;
    const Word before = static_cast<Word>(half >> shift);
    const Word after = mutate(before);
    half = (half & ~(std::uint64_t{0xFFFFFFFF} << shift)) | (std::uint64_t{after} << shift);
    log_.push_back({*spec_, site, pos, before, after});
    fired_ = true;
  };
}

Device::Device(DeviceTopology topo, CostReport& costs, TamperController& tamper, bool secure)
    : topo_(topo), costs_(&costs), tamper_(&tamper), secure_(secure) {
  topo_.validate();
}

Device::Buffer& Device::buffer(Handle h) {
  if (h >= buffers_.size() || !buffers_[h].live) throw IndexError("unknown device handle");
  return buffers_[h];
}

const Device::Buffer& Device::buffer(Handle h) const {
  if (h >= buffers_.size() || !buffers_[h].live) throw IndexError("unknown device handle");
  return buffers_[h];
}

void Device::check_taint(DataClass cls, std::string_view site) const {
  if (secure_ && cls == DataClass::private_plain) {
    throw TaintError("plaintext private data crossed the channel at " + std::string(site));
  }
}

namespace {

std::pair<Eigen::Index, Eigen::Index> even_range(Eigen::Index n, std::size_t parts, std::size_t i) {
  const auto p = static_cast<Eigen::Index>(parts);
  const auto k = static_cast<Eigen::Index>(i);
  return {k * n / p, (k + 1) * n / p};
}

}  // namespace

std::pair<Eigen::Index, Eigen::Index> Device::slice(Handle h, std::size_t dpu) const {
  const Buffer& b = buffer(h);
  switch (b.placement) {
    case Placement::row_split: return even_range(b.data.rows(), topo_.dpu_count, dpu);
    case Placement::col_split: return even_range(b.data.cols(), topo_.dpu_count, dpu);
    case Placement::replicate: return {0, b.data.rows()};
  }
  return {0, 0};
}

std::vector<std::size_t> Device::footprint(const Buffer& b) const {
  std::vector<std::size_t> bytes(topo_.dpu_count, 0);
  for (std::size_t d = 0; d < topo_.dpu_count; ++d) {
    const std::size_t words = static_cast<std::size_t>(b.data.size());
    switch (b.placement) {
      case Placement::row_split: {
        const auto [lo, hi] = even_range(b.data.rows(), topo_.dpu_count, d);
        bytes[d] = static_cast<std::size_t>((hi - lo) * b.data.cols()) * sizeof(Word);
        break;
      }
      case Placement::col_split: {
        const auto [lo, hi] = even_range(b.data.cols(), topo_.dpu_count, d);
        bytes[d] = static_cast<std::size_t>((hi - lo) * b.data.rows()) * sizeof(Word);
        break;
      }
      case Placement::replicate: bytes[d] = words * sizeof(Word); break;
    }
  }
  return bytes;
}

std::vector<std::size_t> Device::mram_usage() const {
  std::vector<std::size_t> use(topo_.dpu_count, 0);
  for (const Buffer& b : buffers_) {
    if (!b.live) continue;
    const auto f = footprint(b);
    for (std::size_t d = 0; d < use.size(); ++d) use[d] += f[d];
  }
  return use;
}

Device::Handle Device::load(const RingMatrix& m, Placement placement, DataClass cls, std::string name) {
  check_taint(cls, name);
  Buffer b{m, placement, cls, std::move(name)};
  const auto need = footprint(b);
  const auto used = mram_usage();
  for (std::size_t d = 0; d < need.size(); ++d) {
    if (used[d] + need[d] > topo_.mram_bytes_per_dpu) {
      throw CapacityError("'" + b.name + "' does not fit in DPU " + std::to_string(d) + " MRAM");
    }
  }
  std::uint64_t payload = 0;
  for (auto n : need) payload += n;
  costs_->current().bytes_h2d += payload;
  tamper_->try_apply(TamperTarget::channel_h2d, std::span<Word>(b.data.data(), static_cast<std::size_t>(b.data.size())),
                     "h2d:" + b.name);
  buffers_.push_back(std::move(b));
  return buffers_.size() - 1;
}

void Device::release(Handle h) {
  Buffer& b = buffer(h);
  b.live = false;
  b.data.resize(0, 0);
}

const RingMatrix& Device::resident(Handle h) const { return buffer(h).data; }

RingVector Device::send(const RingVector& v, DataClass cls, std::string_view site, bool replicated) {
  check_taint(cls, site);
  const std::uint64_t copies = replicated ? topo_.dpu_count : 1;
  costs_->current().bytes_h2d += copies * static_cast<std::uint64_t>(v.size()) * sizeof(Word);
  RingVector out = v;
  tamper_->try_apply(TamperTarget::channel_h2d, std::span<Word>(out.data(), static_cast<std::size_t>(out.size())),
                     "h2d:" + std::string(site));
  return out;
}

RingVector Device::gather(RingVector v, DataClass cls, std::string_view site) {
  check_taint(cls, site);
  costs_->current().bytes_d2h += static_cast<std::uint64_t>(v.size()) * sizeof(Word);
  tamper_->try_apply(TamperTarget::channel_d2h, std::span<Word>(v.data(), static_cast<std::size_t>(v.size())),
                     "d2h:" + std::string(site));
  return v;
}

void Device::tamper_resident(Handle h, std::string_view site) {
  Buffer& b = buffers_[h];
  tamper_->try_apply(TamperTarget::resident_share, std::span<Word>(b.data.data(), static_cast<std::size_t>(b.data.size())),
                     std::string(site) + ":" + b.name);
}

RingVector Device::gemv_local(Handle w, const RingVector& x) {
  Buffer& b = buffer(w);
  if (b.placement == Placement::col_split) throw ConfigError("gemv needs a row-split or replicated matrix");
  if (b.data.cols() != x.size()) throw DimensionError("gemv: matrix has " + std::to_string(b.data.cols()) +
                                                      " columns, vector has " + std::to_string(x.size()));
  tamper_resident(w, "gemv");
  RingVector y(b.data.rows());
  const std::size_t parts = b.placement == Placement::replicate ? 1 : topo_.dpu_count;
  for (std::size_t d = 0; d < parts; ++d) {
    const auto [lo, hi] = b.placement == Placement::replicate ? std::pair<Eigen::Index, Eigen::Index>{0, b.data.rows()}
                                                               : slice(w, d);
    if (hi > lo) y.segment(lo, hi - lo) = b.data.middleRows(lo, hi - lo) * x;
  }
  costs_->current().device_mac_ops += static_cast<std::uint64_t>(b.data.size());
  tamper_->try_apply(TamperTarget::device_result, std::span<Word>(y.data(), static_cast<std::size_t>(y.size())),
                     "gemv:" + b.name);
  return y;
}

RingVector Device::gemv(Handle w, const RingVector& x, DataClass result_cls) {
  return gather(gemv_local(w, x), result_cls, "gemv:" + buffer(w).name);
}

std::vector<RingVector> Device::grad_partials(Handle xh, const RingVector& e) {
  Buffer& b = buffer(xh);
  if (b.placement != Placement::row_split) throw ConfigError("grad needs a row-split matrix");
  if (b.data.rows() != e.size()) throw DimensionError("grad: matrix has " + std::to_string(b.data.rows()) +
                                                      " rows, vector has " + std::to_string(e.size()));
  tamper_resident(xh, "grad");
  std::vector<RingVector> partials;
  for (std::size_t d = 0; d < topo_.dpu_count; ++d) {
    const auto [lo, hi] = slice(xh, d);
    partials.push_back(b.data.middleRows(lo, hi - lo).transpose() * e.segment(lo, hi - lo));
  }
  costs_->current().device_mac_ops += static_cast<std::uint64_t>(b.data.size());
  // a tamper of "the result" hits one word of the concatenated partials
  const Eigen::Index n = b.data.cols();
  RingVector flat(n * static_cast<Eigen::Index>(partials.size()));
  for (std::size_t d = 0; d < partials.size(); ++d) flat.segment(static_cast<Eigen::Index>(d) * n, n) = partials[d];
  if (tamper_->try_apply(TamperTarget::device_result, std::span<Word>(flat.data(), static_cast<std::size_t>(flat.size())),
                         "grad:" + b.name)) {
    for (std::size_t d = 0; d < partials.size(); ++d) partials[d] = flat.segment(static_cast<Eigen::Index>(d) * n, n);
  }
  return partials;
}

RingVector Device::grad(Handle xh, const RingVector& e, DataClass result_cls) {
  const std::vector<RingVector> partials = grad_partials(xh, e);
  const Eigen::Index n = buffer(xh).data.cols();
  RingVector flat(n * static_cast<Eigen::Index>(partials.size()));
  for (std::size_t d = 0; d < partials.size(); ++d) flat.segment(static_cast<Eigen::Index>(d) * n, n) = partials[d];
  flat = gather(std::move(flat), result_cls, "grad:" + buffer(xh).name);
  RingVector sum = RingVector::Zero(n);
  for (std::size_t d = 0; d < partials.size(); ++d) sum += flat.segment(static_cast<Eigen::Index>(d) * n, n);
  return sum;
}

RingMatrix Device::embedding_local(Handle table, std::span<const std::uint32_t> ids, const RingVector& weights,
                                   std::size_t batch, std::size_t pf) {
  Buffer& b = buffer(table);
  if (b.placement != Placement::col_split) throw ConfigError("embedding needs a column-split table");
  if (ids.size() != batch * pf || static_cast<std::size_t>(weights.size()) != ids.size()) {
    throw DimensionError("embedding: expected batch * pf ids and weights");
  }
  for (auto id : ids) {
    if (id >= b.data.rows()) {
      throw IndexError("embedding id " + std::to_string(id) + " out of range for '" + b.name + "'");
    }
  }
  tamper_resident(table, "embedding");
  RingMatrix out = RingMatrix::Zero(static_cast<Eigen::Index>(batch), b.data.cols());
  for (std::size_t d = 0; d < topo_.dpu_count; ++d) {
    const auto [lo, hi] = slice(table, d);
    if (hi <= lo) continue;
    for (std::size_t k = 0; k < batch; ++k) {
      for (std::size_t j = 0; j < pf; ++j) {
        const std::size_t t = k * pf + j;
        out.row(static_cast<Eigen::Index>(k)).segment(lo, hi - lo) +=
            weights[static_cast<Eigen::Index>(t)] * b.data.row(ids[t]).segment(lo, hi - lo);
      }
    }
  }
  costs_->current().device_mac_ops += static_cast<std::uint64_t>(ids.size()) * static_cast<std::uint64_t>(b.data.cols());
  tamper_->try_apply(TamperTarget::device_result, std::span<Word>(out.data(), static_cast<std::size_t>(out.size())),
                     "embedding:" + b.name);
  return out;
}

Device::Handle Device::open_copy(Handle h, const KeyRegistry& keys, const OtpContext& ctx) {
  const Buffer& src = buffer(h);
  const auto n = static_cast<std::size_t>(src.data.size());
  Buffer b{src.data, src.placement, DataClass::private_plain, src.name + ".open"};
  const RingVector plain = open(keys, ctx, std::span<const Word>(src.data.data(), n));
  std::copy(plain.begin(), plain.end(), b.data.data());
  costs_->current().device_prf_calls += blocks_spanned(ctx.base_index, n);
  // device-internal copy: no channel transfer
  const auto need = footprint(b);
  const auto used = mram_usage();
  for (std::size_t d = 0; d < need.size(); ++d) {
    if (used[d] + need[d] > topo_.mram_bytes_per_dpu) throw CapacityError("no room to open '" + src.name + "'");
  }
  buffers_.push_back(std::move(b));
  return buffers_.size() - 1;
}

RingVector Device::open_vector(const KeyRegistry& keys, const OtpContext& ctx, const RingVector& sealed) {
  costs_->current().device_prf_calls += blocks_spanned(ctx.base_index, static_cast<std::size_t>(sealed.size()));
  return open(keys, ctx, sealed);
}

RingVector Device::seal_vector(const KeyRegistry& keys, const OtpContext& ctx, const RingVector& plain) {
  costs_->current().device_prf_calls += blocks_spanned(ctx.base_index, static_cast<std::size_t>(plain.size()));
  return seal(keys, ctx, plain);
}

std::vector<gc::Label> Device::evaluate_garbled(const gc::GarbledCircuit& gc, std::span<const gc::Label> garbler_labels,
                                                std::span<const gc::Label> evaluator_labels,
                                                gc::EvaluationTrace* trace) {
  CostLedger& c = costs_->current();
  c.gc_bytes += gc.table_bytes();
  c.bytes_h2d += (garbler_labels.size() + evaluator_labels.size() + gc.constant_labels.size()) * sizeof(gc::Label);
  const gc::RowTap tap = tamper_->gc_tap(gc.and_tables.size(), "gc_table");
  return gc::evaluate_labels(gc, garbler_labels, evaluator_labels, trace, tap);
}

}  // namespace pimsec
