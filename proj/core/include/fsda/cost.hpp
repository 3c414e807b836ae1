// SPDX-License-Identifier: MIT
#pragma once

#include <cstdint>
#include <vector>

namespace fsda::cost {

/// One iteration worth of operation counts.  All counts are fused
/// multiply-add pairs (one multiply plus one add books as a single flop),
/// which is the convention the factor-product complexity estimates use: a
/// product of a (2b+1)-diagonal matrix with an N x m block is ~2Nbm.
struct IterCost {
  int k = 0;
  std::int64_t band_mul_macs = 0;       // banded x banded products
  std::int64_t factor_product_macs = 0; // banded helper x tall factor products
  std::int64_t kernel_macs = 0;         // small dense kernel/theta algebra
  std::int64_t qr_macs = 0;             // compression QR estimates
  std::int64_t residual_macs = 0;       // products done only for residuals
  std::int64_t peak_factor_values = 0;  // widest live factor, in doubles
};

/// Accumulates per-iteration costs for one solve.  Installed via CostScope;
/// the counting hooks are no-ops when nothing is installed.
struct Tally {
  std::vector<IterCost> iterations;
  IterCost& current();  // iteration opened by begin_iteration
};

enum class Bucket { kBandMul, kFactorProduct, kKernel, kQr, kResidual };

/// RAII installation of a tally on this thread.  Solves are single-threaded
/// at the orchestration level (inner products may fan out to worker threads,
/// but counts are computed analytically on the calling thread), so a
/// thread_local pointer is enough and keeps the arithmetic kernels free of
/// plumbing.
class CostScope {
 public:
  explicit CostScope(Tally* tally);
  ~CostScope();
  CostScope(const CostScope&) = delete;
  CostScope& operator=(const CostScope&) = delete;

 private:
  Tally* previous_;
};

void begin_iteration(int k);
void add(Bucket bucket, std::int64_t macs);
void note_factor_values(std::int64_t values);
bool active();

}  // namespace fsda::cost
