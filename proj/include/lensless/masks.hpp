#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

#include "lensless/grid.hpp"
#include "lensless/imaging.hpp"

namespace lensless {

// Unconstrained real parameters behind a learnable binary mask.
class MaskLogits {
 public:
  explicit MaskLogits(RealGrid logits);

  // Logits of +magnitude on open cells and -magnitude on closed ones.
  static MaskLogits from_mask(const CodedMask& mask, double magnitude = 8.0);
  // i.i.d. uniform in [-spread, spread]; about half the cells start open.
  static MaskLogits uniform(std::size_t m, std::uint64_t seed, double spread = 0.1);

  std::size_t size() const { return logits_.rows(); }
  const RealGrid& values() const { return logits_; }
  RealGrid& mutable_values() { return logits_; }

  friend bool operator==(const MaskLogits&, const MaskLogits&) = default;

 private:
  RealGrid logits_;
};

enum class MaskKind { Pinhole, FullOpen, Random, Learned };

std::string_view to_string(MaskKind kind);
MaskKind parse_mask_kind(std::string_view name);

CodedMask make_pinhole(int m);
CodedMask make_full_open(int m);
CodedMask make_random(int m, double ratio, std::uint64_t seed);

inline double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// Sigmoid relaxation used in the training forward pass.
RealGrid relax(const MaskLogits& w);

// Hard threshold: open iff logit > 0 (a tie at exactly 0 is closed).
CodedMask binarize(const MaskLogits& w);

// Straight-through backward: grad ⊙ σ(w)(1 − σ(w)).
RealGrid ste_backward(const MaskLogits& w, const RealGrid& grad_wrt_mask);

double aperture_ratio(const CodedMask& h);

}  // namespace lensless
