#pragma once

// Human-imperceptibility losses on the (relaxed) mask and the joint objective
// L = L_rec + alpha * L_hi. Every loss returns its value together with the
// gradient with respect to the m×m mask. Batch terms are summed in index
// order; dividing by the batch size is the caller's decision.

#include <span>
#include <string_view>

#include "lensless/grid.hpp"
#include "lensless/imaging.hpp"

namespace lensless {

enum class HiKind { None, Sim, TV, Inv, RIP };

std::string_view to_string(HiKind kind);
HiKind parse_hi_kind(std::string_view name);
// True for losses whose value is a sum over batch images (sim, rip).
bool is_batch_sum(HiKind kind);
// Sign with which a hi loss enters the minimized objective. The RIP term is
// maximized so that training lowers the measurement/signal energy ratio;
// every other term is minimized.
double objective_sign(HiKind kind);

struct LossWeights {
  double alpha = 1.0;
  HiKind hi_kind = HiKind::None;

  void validate() const;
};

struct MaskGradients {
  RealGrid dx;  // m × (m-1), h[r][c+1] - h[r][c]
  RealGrid dy;  // (m-1) × m, h[r+1][c] - h[r][c]
};

MaskGradients mask_gradients(const RealGrid& h);

struct LossValue {
  double value = 0.0;
  RealGrid grad_mask;
};

// sum_i ||H*x_i - 1_m*x_i||², both operators under the same normalization.
LossValue sim_loss(const RealGrid& h, std::span<const Image> batch, const CaptureConfig& cfg);

// -||Δx H||_1 - ||Δy H||_1 with sign(0) = 0 in the subgradient.
LossValue tv_loss(const RealGrid& h);

// -||H||_1
LossValue inv_loss(const RealGrid& h);

// -sum_i ||H*x_i||² / (||x_i||² + epsilon)
LossValue rip_loss(const RealGrid& h, std::span<const Image> batch, const CaptureConfig& cfg,
                   double epsilon = kDefaultEpsilon);

// Dispatch on kind; HiKind::None yields a zero loss.
LossValue hi_loss(HiKind kind, const RealGrid& h, std::span<const Image> batch,
                  const CaptureConfig& cfg, double epsilon = kDefaultEpsilon);

LossValue total_loss(const LossValue& rec, const LossValue& hi, const LossWeights& w);

}  // namespace lensless
