#pragma once

// Application workloads built from the host kernels, plus synthetic input
// generators. Every workload is pure ring arithmetic; the scheme only changes
// where the kernels run and how operands are masked.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "pimsec/host.hpp"
#include "pimsec/ring.hpp"

namespace pimsec {

enum class WorkloadKind { mlp, dlrm, linreg, logreg, gemm, conv };

inline constexpr WorkloadKind kAllWorkloads[] = {WorkloadKind::mlp,    WorkloadKind::dlrm, WorkloadKind::linreg,
                                                 WorkloadKind::logreg, WorkloadKind::gemm, WorkloadKind::conv};

std::string_view to_string(WorkloadKind w);
WorkloadKind parse_workload(std::string_view s);
bool is_training(WorkloadKind w);

/// Called once setup (registration, offline phase) is done and before the
/// first online kernel. The adversary arms its tamper here.
using OnlineHook = std::function<void(Host&)>;

struct MlpModel {
  std::vector<RingMatrix> layers;  // public, Q12
};

struct EmbeddingInput {
  std::vector<RingMatrix> tables;  // private, Q12
  std::size_t batch = 8;
  std::size_t pf = 4;
  std::vector<std::vector<std::uint32_t>> ids;  // per table, batch * pf
  std::vector<RingVector> weights;              // per table, Q12
};

struct RegressionConfig {
  std::size_t iterations = 50;
  Word lr = fx_from_double(0.05);
};

struct RegressionData {
  RingMatrix x;  // samples x features, Q12
  RingVector y;  // Q12
  RingVector w0;
  RegressionConfig cfg;
};

/// Per layer: z = W h, h = relu(rescale(z)). Returns the last h.
RingVector mlp_infer(Host& host, const MlpModel& model, const RingVector& x, const OnlineHook& hook = {});

/// Pooled, rescaled outputs, one batch x cols matrix per table.
std::vector<RingMatrix> dlrm_lookup(Host& host, const EmbeddingInput& in, const OnlineHook& hook = {});

RingVector linreg_train(Host& host, const RegressionData& data, const OnlineHook& hook = {});
/// rescale(X w).
RingVector linreg_infer(Host& host, const RingMatrix& x, const RingVector& w, const OnlineHook& hook = {});
/// Activation is the clamp sigmoid; on the host (variant A) or through
/// garbled circuits on the device (A2Y), per host.config().variant.
RingVector logreg_train(Host& host, const RegressionData& data, const OnlineHook& hook = {});

/// Raw ring product A B, one GEMV per column of B.
RingMatrix gemm_by_gemv(Host& host, const RingMatrix& a, const RingMatrix& b, const OnlineHook& hook = {});
/// Im2col: one row per output position, kernel-sized patches.
RingMatrix unroll(const RingMatrix& input, Eigen::Index k, Eigen::Index stride);
/// Raw valid convolution (correlation) of a private input with a public kernel.
RingMatrix conv_by_unroll(Host& host, const RingMatrix& input, const RingMatrix& kernel, Eigen::Index stride,
                          const OnlineHook& hook = {});

// Synthetic generators. Ranges keep every true product inside int32, the
// precondition of the integrity check.

struct WorkloadParams {
  std::size_t mlp_depth = 10;
  std::size_t mlp_width = 16;
  std::size_t dlrm_tables = 4;
  std::size_t dlrm_rows = 64;
  std::size_t dlrm_cols = 8;
  std::size_t dlrm_batch = 8;
  std::size_t dlrm_pf = 4;
  std::size_t linreg_samples = 100;
  std::size_t linreg_features = 4;
  std::size_t linreg_iterations = 50;
  std::size_t logreg_samples = 64;
  std::size_t logreg_features = 2;
  std::size_t logreg_iterations = 100;
  std::size_t gemm_n = 8;
  std::size_t conv_input = 4;
  std::size_t conv_kernel = 2;
  std::size_t conv_stride = 2;
};

MlpModel make_mlp(const WorkloadParams& p, std::uint64_t seed);
RingVector make_mlp_input(const WorkloadParams& p, std::uint64_t seed);
EmbeddingInput make_embedding(const WorkloadParams& p, std::uint64_t seed);
RegressionData make_linreg(const WorkloadParams& p, std::uint64_t seed);
/// y = 1 iff x1 > x2 (first two features).
RegressionData make_logreg(const WorkloadParams& p, std::uint64_t seed);

/// Generates the inputs for `kind` from `seed`, runs it on `host` and returns
/// the output words in a fixed order.
RingVector run_workload(Host& host, WorkloadKind kind, const WorkloadParams& p, std::uint64_t seed,
                        const OnlineHook& hook = {});

}  // namespace pimsec
