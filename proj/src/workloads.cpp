#include "pimsec/workloads.hpp"

#include <random>
#include <string>

#include "pimsec/errors.hpp"

namespace pimsec {

std::string_view to_string(WorkloadKind w) {
  switch (w) {
    case WorkloadKind::mlp: return "mlp";
    case WorkloadKind::dlrm: return "dlrm";
    case WorkloadKind::linreg: return "linreg";
    case WorkloadKind::logreg: return "logreg";
    case WorkloadKind::gemm: return "gemm";
    case WorkloadKind::conv: return "conv";
  }
  return "?";
}

WorkloadKind parse_workload(std::string_view s) {
  for (WorkloadKind w : kAllWorkloads) {
    if (to_string(w) == s) return w;
  }
  throw ConfigError("unknown workload '" + std::string(s) + "'");
}

bool is_training(WorkloadKind w) { return w == WorkloadKind::linreg || w == WorkloadKind::logreg; }

namespace {

void run_hook(const OnlineHook& hook, Host& host) {
  if (hook) hook(host);
}

std::string step(std::string_view kind, std::size_t i) { return std::string(kind) + "[" + std::to_string(i) + "]"; }

void reject_training_precompute(const Host& host) {
  if (host.config().scheme == Scheme::pim_precompute) {
    throw ConfigError("pim_precompute needs static operands; training updates the weights every iteration");
  }
}

RingVector gradient_step(const RingVector& w, const RingVector& g, Word lr) {
  const RingVector g12 = fx_rescale(g);
  return w - g12.unaryExpr([lr](Word v) { return fx_mul_trunc(lr, v); });
}

RingVector train(Host& host, const RegressionData& d, bool logistic, const OnlineHook& hook) {
  reject_training_precompute(host);
  if (d.x.rows() != d.y.size() || d.x.cols() != d.w0.size()) throw DimensionError("regression: shape mismatch");
  const bool a2y = logistic && host.config().variant == Variant::A2Y;
  const auto x = host.register_private(d.x, "X", kColumnTags | kRowTags);
  const PrivateVector y = host.store_private(d.y);
  run_hook(hook, host);

  RingVector w = d.w0;
  for (std::size_t it = 0; it < d.cfg.iterations; ++it) {
    RingVector a;
    if (a2y) {
      a = host.activation_a2y(x, w, step("dot", it));
    } else {
      const RingVector z = host.gemv_private(x, w, step("dot", it));
      a = logistic ? RingVector(fx_sigmoid_clamp(fx_rescale(z))) : RingVector(fx_rescale(z));
    }
    const RingVector e = a - host.load_private(y);
    const RingVector g = host.gemv_private_t(x, e, step("grad", it));
    w = gradient_step(w, g, d.cfg.lr);
  }
  return w;
}

RingMatrix uniform_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c, std::int32_t lo, std::int32_t hi) {
  std::uniform_int_distribution<std::int32_t> d(lo, hi);
  RingMatrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<Word>(d(rng));
  return m;
}

RingVector uniform_vector(std::mt19937_64& rng, Eigen::Index n, std::int32_t lo, std::int32_t hi) {
  std::uniform_int_distribution<std::int32_t> d(lo, hi);
  RingVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = static_cast<Word>(d(rng));
  return v;
}

Eigen::Index idx(std::size_t v) { return static_cast<Eigen::Index>(v); }

}  // namespace

RingVector mlp_infer(Host& host, const MlpModel& model, const RingVector& x, const OnlineHook& hook) {
  if (model.layers.empty()) throw ConfigError("mlp: no layers");
  std::vector<Host::MatrixId> ids;
  Eigen::Index width = x.size();
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const RingMatrix& w = model.layers[l];
    if (w.cols() != width) throw DimensionError("mlp: layer " + std::to_string(l) + " input width mismatch");
    width = w.rows();
    ids.push_back(host.register_public(w, "W" + std::to_string(l)));
  }
  if (host.config().scheme == Scheme::pim_precompute) {
    for (auto id : ids) host.plan_gemv_public(id);
  }
  run_hook(hook, host);

  RingVector h = x;
  for (std::size_t l = 0; l < ids.size(); ++l) {
    const auto mode = l == 0 ? Host::ShareMode::split : Host::ShareMode::reshare;
    const RingVector z = host.gemv_public(ids[l], h, step("layer", l), mode);
    h = relu(fx_rescale(z));
  }
  return h;
}

std::vector<RingMatrix> dlrm_lookup(Host& host, const EmbeddingInput& in, const OnlineHook& hook) {
  if (in.ids.size() != in.tables.size() || in.weights.size() != in.tables.size()) {
    throw DimensionError("dlrm: ids and weights needed per table");
  }
  std::vector<Host::MatrixId> ids;
  for (std::size_t t = 0; t < in.tables.size(); ++t) {
    ids.push_back(host.register_private(in.tables[t], "T" + std::to_string(t), kRowTags, Placement::col_split));
    if (host.config().scheme == Scheme::pim_precompute) host.pregenerate_pads(ids.back());
  }
  run_hook(hook, host);

  std::vector<RingMatrix> out;
  for (std::size_t t = 0; t < ids.size(); ++t) {
    const RingMatrix pooled = host.embedding(ids[t], in.ids[t], in.weights[t], in.batch, in.pf, step("table", t));
    out.emplace_back(fx_rescale(pooled));
  }
  return out;
}

RingVector linreg_train(Host& host, const RegressionData& data, const OnlineHook& hook) {
  return train(host, data, false, hook);
}

RingVector logreg_train(Host& host, const RegressionData& data, const OnlineHook& hook) {
  return train(host, data, true, hook);
}

RingVector linreg_infer(Host& host, const RingMatrix& x, const RingVector& w, const OnlineHook& hook) {
  const auto id = host.register_private(x, "Xinfer", kColumnTags);
  if (host.config().scheme == Scheme::pim_precompute) host.plan_gemv_private(id, w);
  run_hook(hook, host);
  return fx_rescale(host.gemv_private(id, w, "infer"));
}

RingMatrix gemm_by_gemv(Host& host, const RingMatrix& a, const RingMatrix& b, const OnlineHook& hook) {
  if (a.cols() != b.rows()) throw DimensionError("gemm: inner dimensions differ");
  const auto id = host.register_private(a, "A", kColumnTags);
  if (host.config().scheme == Scheme::pim_precompute) {
    for (Eigen::Index j = 0; j < b.cols(); ++j) host.plan_gemv_private(id, b.col(j));
  }
  run_hook(hook, host);
  RingMatrix c(a.rows(), b.cols());
  for (Eigen::Index j = 0; j < b.cols(); ++j) {
    c.col(j) = host.gemv_private(id, b.col(j), step("col", static_cast<std::size_t>(j)));
  }
  return c;
}

RingMatrix unroll(const RingMatrix& input, Eigen::Index k, Eigen::Index stride) {
  if (k <= 0 || stride <= 0 || k > input.rows() || k > input.cols()) throw DimensionError("conv: bad kernel or stride");
  const Eigen::Index oh = (input.rows() - k) / stride + 1;
  const Eigen::Index ow = (input.cols() - k) / stride + 1;
  RingMatrix u(oh * ow, k * k);
  for (Eigen::Index r = 0; r < oh; ++r) {
    for (Eigen::Index c = 0; c < ow; ++c) {
      const RingMatrix patch = input.block(r * stride, c * stride, k, k);
      u.row(r * ow + c) = Eigen::Map<const RingVector>(patch.data(), k * k).transpose();
    }
  }
  return u;
}

RingMatrix conv_by_unroll(Host& host, const RingMatrix& input, const RingMatrix& kernel, Eigen::Index stride,
                          const OnlineHook& hook) {
  if (kernel.rows() != kernel.cols()) throw DimensionError("conv: square kernels only");
  const Eigen::Index k = kernel.rows();
  const RingMatrix u = unroll(input, k, stride);
  const RingVector w = Eigen::Map<const RingVector>(kernel.data(), k * k);
  const auto id = host.register_private(u, "U", kColumnTags);
  if (host.config().scheme == Scheme::pim_precompute) host.plan_gemv_private(id, w);
  run_hook(hook, host);
  const RingVector y = host.gemv_private(id, w, "conv");
  const Eigen::Index ow = (input.cols() - k) / stride + 1;
  return Eigen::Map<const RingMatrix>(y.data(), y.size() / ow, ow);
}

MlpModel make_mlp(const WorkloadParams& p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  MlpModel m;
  for (std::size_t l = 0; l < p.mlp_depth; ++l) {
    m.layers.push_back(uniform_matrix(rng, idx(p.mlp_width), idx(p.mlp_width), -1024, 1024));  // +-0.25
  }
  return m;
}

RingVector make_mlp_input(const WorkloadParams& p, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  return uniform_vector(rng, idx(p.mlp_width), 1, 4095);
}

EmbeddingInput make_embedding(const WorkloadParams& p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  EmbeddingInput in;
  in.batch = p.dlrm_batch;
  in.pf = p.dlrm_pf;
  std::uniform_int_distribution<std::uint32_t> row(0, static_cast<std::uint32_t>(p.dlrm_rows - 1));
  for (std::size_t t = 0; t < p.dlrm_tables; ++t) {
    in.tables.push_back(uniform_matrix(rng, idx(p.dlrm_rows), idx(p.dlrm_cols), -4096, 4096));
    std::vector<std::uint32_t> ids(p.dlrm_batch * p.dlrm_pf);
    for (auto& i : ids) i = row(rng);
    in.ids.push_back(std::move(ids));
    in.weights.push_back(uniform_vector(rng, idx(p.dlrm_batch * p.dlrm_pf), 0, 4096));
  }
  return in;
}

RegressionData make_linreg(const WorkloadParams& p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  RegressionData d;
  d.x = uniform_matrix(rng, idx(p.linreg_samples), idx(p.linreg_features), -1024, 1024);  // +-0.25
  const RingVector truth = uniform_vector(rng, idx(p.linreg_features), -4096, 4096);
  d.y = fx_rescale(d.x * truth);
  d.w0 = RingVector::Zero(idx(p.linreg_features));
  d.cfg.iterations = p.linreg_iterations;
  d.cfg.lr = fx_from_double(0.05);
  return d;
}

RegressionData make_logreg(const WorkloadParams& p, std::uint64_t seed) {
  if (p.logreg_features < 2) throw ConfigError("logreg needs at least two features");
  std::mt19937_64 rng(seed);
  RegressionData d;
  d.x = uniform_matrix(rng, idx(p.logreg_samples), idx(p.logreg_features), -2048, 2048);  // +-0.5
  d.y.resize(idx(p.logreg_samples));
  for (Eigen::Index i = 0; i < d.x.rows(); ++i) {
    d.y[i] = to_signed(d.x(i, 0)) > to_signed(d.x(i, 1)) ? kFxOne : 0;
  }
  d.w0 = RingVector::Zero(idx(p.logreg_features));
  d.cfg.iterations = p.logreg_iterations;
  d.cfg.lr = fx_from_double(0.01);
  return d;
}

RingVector run_workload(Host& host, WorkloadKind kind, const WorkloadParams& p, std::uint64_t seed,
                        const OnlineHook& hook) {
  auto concat = [](const std::vector<RingMatrix>& ms) {
    std::vector<Word> flat;
    for (const auto& m : ms) flat.insert(flat.end(), m.data(), m.data() + m.size());
    return RingVector(Eigen::Map<const RingVector>(flat.data(), idx(flat.size())));
  };
  std::mt19937_64 rng(seed);
  switch (kind) {
    case WorkloadKind::mlp:
      return mlp_infer(host, make_mlp(p, seed), make_mlp_input(p, seed), hook);
    case WorkloadKind::dlrm:
      return concat(dlrm_lookup(host, make_embedding(p, seed), hook));
    case WorkloadKind::linreg: {
      const RegressionData d = make_linreg(p, seed);
      const RingVector w = linreg_train(host, d, hook);
      const RingVector pred = linreg_infer(host, d.x, w);
      RingVector out(w.size() + pred.size());
      out << w, pred;
      return out;
    }
    case WorkloadKind::logreg:
      return logreg_train(host, make_logreg(p, seed), hook);
    case WorkloadKind::gemm: {
      const RingMatrix a = uniform_matrix(rng, idx(p.gemm_n), idx(p.gemm_n), -4096, 4096);
      const RingMatrix b = uniform_matrix(rng, idx(p.gemm_n), idx(p.gemm_n), -4096, 4096);
      return concat({gemm_by_gemv(host, a, b, hook)});
    }
    case WorkloadKind::conv: {
      const RingMatrix in = uniform_matrix(rng, idx(p.conv_input), idx(p.conv_input), -4096, 4096);
      const RingMatrix k = uniform_matrix(rng, idx(p.conv_kernel), idx(p.conv_kernel), -4096, 4096);
      return concat({conv_by_unroll(host, in, k, static_cast<Eigen::Index>(p.conv_stride), hook)});
    }
  }
  throw ConfigError("unknown workload");
}

}  // namespace pimsec
