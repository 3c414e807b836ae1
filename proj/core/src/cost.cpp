// SPDX-License-Identifier: MIT
#include "fsda/cost.hpp"

#include <algorithm>

namespace fsda::cost {
namespace {
thread_local Tally* g_tally = nullptr;
}

IterCost& Tally::current() {
  if (iterations.empty()) iterations.emplace_back();
  return iterations.back();
}

CostScope::CostScope(Tally* tally) : previous_(g_tally) { g_tally = tally; }
CostScope::~CostScope() { g_tally = previous_; }

void begin_iteration(int k) {
  if (!g_tally) return;
  IterCost fresh;
  fresh.k = k;
  g_tally->iterations.push_back(fresh);
}

void add(Bucket bucket, std::int64_t macs) {
  if (!g_tally || macs <= 0) return;
  IterCost& row = g_tally->current();
  switch (bucket) {
    case Bucket::kBandMul: row.band_mul_macs += macs; break;
    case Bucket::kFactorProduct: row.factor_product_macs += macs; break;
    case Bucket::kKernel: row.kernel_macs += macs; break;
    case Bucket::kQr: row.qr_macs += macs; break;
    case Bucket::kResidual: row.residual_macs += macs; break;
  }
}

void note_factor_values(std::int64_t values) {
  if (!g_tally) return;
  IterCost& row = g_tally->current();
  row.peak_factor_values = std::max(row.peak_factor_values, values);
}

bool active() { return g_tally != nullptr; }

}  // namespace fsda::cost
