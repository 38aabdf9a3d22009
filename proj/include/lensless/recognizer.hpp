#pragma once

// Small fully connected classifier trained from scratch, with reverse-mode
// gradients down to its input so the mask upstream can be learned.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lensless/grid.hpp"

namespace lensless {

enum class Activation { None, ReLU };

struct LayerSpec {
  std::size_t units = 0;
  Activation activation = Activation::None;
};

struct DenseLayer {
  Activation activation = Activation::None;
  RealGrid weights;  // out × in
  std::vector<double> bias;

  std::size_t inputs() const { return weights.cols(); }
  std::size_t outputs() const { return weights.rows(); }
  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct RecognizerParams {
  std::size_t input_size = 0;
  std::vector<DenseLayer> layers;

  // Glorot-uniform weights, zero biases.
  static RecognizerParams init(std::size_t input_size, std::span<const LayerSpec> arch,
                               std::uint64_t seed);
  // flatten -> dense(hidden, ReLU) -> dense(classes)
  static RecognizerParams mlp(std::size_t input_size, std::size_t hidden, std::size_t classes,
                              std::uint64_t seed);

  std::size_t num_classes() const { return layers.empty() ? 0 : layers.back().outputs(); }
  std::vector<LayerSpec> architecture() const;
  // e.g. "flatten(576)-dense(256,relu)-dense(10)"
  std::string describe() const;
  void validate() const;

  friend bool operator==(const RecognizerParams&, const RecognizerParams&) = default;
};

struct LabeledBatch {
  std::vector<RealGrid> inputs;
  std::vector<std::size_t> labels;
};

// Activations kept for the backward pass.
struct ForwardPass {
  RealGrid input;                   // batch × input_size
  std::vector<RealGrid> pre;        // per layer, batch × units
  std::vector<RealGrid> post;       // per layer, after activation
  const RealGrid& logits() const { return post.back(); }
  bool empty() const { return post.empty(); }
};

ForwardPass forward(const RecognizerParams& params, std::span<const RealGrid> inputs);
inline ForwardPass forward(const RecognizerParams& params, const LabeledBatch& batch) {
  return forward(params, batch.inputs);
}

struct CrossEntropy {
  double loss = 0.0;
  RealGrid grad_logits;
};

// Mean over the batch of -log softmax(logits)[label].
CrossEntropy cross_entropy(const RealGrid& logits, std::span<const std::size_t> labels);
RealGrid softmax(const RealGrid& logits);

struct LayerGradients {
  RealGrid weights;
  std::vector<double> bias;
};

struct RecognizerGradients {
  std::vector<LayerGradients> layers;
  std::vector<RealGrid> inputs;  // one grid per batch element, shaped like the input
};

RecognizerGradients backward(const RecognizerParams& params, const ForwardPass& pass,
                             const RealGrid& grad_logits, std::size_t input_rows,
                             std::size_t input_cols);

struct SgdOptions {
  double lr = 0.1;
  double momentum = 0.9;
  double weight_decay = 5e-4;
};

// v <- momentum * v + grad + weight_decay * param;  param <- param - lr * v
void sgd_update(std::span<double> param, std::span<const double> grad, std::span<double> velocity,
                const SgdOptions& opt);

struct SgdState {
  std::vector<LayerGradients> velocity;
};

void sgd_step(RecognizerParams& params, const RecognizerGradients& grads, SgdState& state,
              const SgdOptions& opt);

// Per-sample min-max contrast stretch to [0,1] applied to measurements
// before the recognizer. A flat input maps to zeros.
struct ContrastStretch {
  RealGrid output;
  std::size_t argmin = 0;
  std::size_t argmax = 0;
  double range = 0.0;
};

ContrastStretch contrast_stretch(const RealGrid& y);
RealGrid contrast_stretch_backward(const ContrastStretch& fwd, const RealGrid& grad_output);

std::size_t argmax_row(const RealGrid& logits, std::size_t row);

}  // namespace lensless
