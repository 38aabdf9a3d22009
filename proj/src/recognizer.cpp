#include "lensless/recognizer.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "lensless/kernels.hpp"

namespace lensless {

RecognizerParams RecognizerParams::init(std::size_t input_size, std::span<const LayerSpec> arch,
                                        std::uint64_t seed) {
  if (input_size == 0 || arch.empty()) throw DimensionError("empty recognizer architecture");
  RecognizerParams p;
  p.input_size = input_size;
  std::mt19937_64 rng(seed);
  std::size_t fan_in = input_size;
  for (const LayerSpec& spec : arch) {
    if (spec.units == 0) throw DimensionError("dense layer with zero units");
    DenseLayer layer;
    layer.activation = spec.activation;
    layer.weights = RealGrid(spec.units, fan_in);
    layer.bias.assign(spec.units, 0.0);
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + spec.units));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& w : layer.weights.span()) w = dist(rng);
    p.layers.push_back(std::move(layer));
    fan_in = spec.units;
  }
  p.validate();
  return p;
}

RecognizerParams RecognizerParams::mlp(std::size_t input_size, std::size_t hidden,
                                       std::size_t classes, std::uint64_t seed) {
  const LayerSpec arch[] = {{hidden, Activation::ReLU}, {classes, Activation::None}};
  return init(input_size, arch, seed);
}

std::vector<LayerSpec> RecognizerParams::architecture() const {
  std::vector<LayerSpec> out;
  for (const auto& l : layers) out.push_back({l.outputs(), l.activation});
  return out;
}

std::string RecognizerParams::describe() const {
  std::string s = "flatten(" + std::to_string(input_size) + ")";
  for (const auto& l : layers) {
    s += "-dense(" + std::to_string(l.outputs());
    if (l.activation == Activation::ReLU) s += ",relu";
    s += ")";
  }
  return s;
}

void RecognizerParams::validate() const {
  if (layers.empty()) throw DimensionError("recognizer has no layers");
  std::size_t fan_in = input_size;
  for (const auto& l : layers) {
    if (l.inputs() != fan_in || l.bias.size() != l.outputs()) {
      throw DimensionError("recognizer layer shapes do not chain");
    }
    fan_in = l.outputs();
  }
  if (num_classes() < 2) throw DimensionError("recognizer needs at least 2 classes");
}

ForwardPass forward(const RecognizerParams& params, std::span<const RealGrid> inputs) {
  params.validate();
  if (inputs.empty()) throw DimensionError("empty recognizer batch");
  const std::size_t batch = inputs.size();
  ForwardPass pass;
  pass.input = RealGrid(batch, params.input_size);
  for (std::size_t b = 0; b < batch; ++b) {
    if (inputs[b].size() != params.input_size) {
      throw DimensionError("recognizer input size mismatch");
    }
    std::copy(inputs[b].span().begin(), inputs[b].span().end(), pass.input.row(b).begin());
  }
  const RealGrid* x = &pass.input;
  for (const DenseLayer& layer : params.layers) {
    RealGrid z(batch, layer.outputs());
    for (std::size_t b = 0; b < batch; ++b) {
      const auto xb = x->row(b);
      for (std::size_t j = 0; j < layer.outputs(); ++j) {
        z(b, j) = kernels::dot(layer.weights.row(j), xb) + layer.bias[j];
      }
    }
    RealGrid a = z;
    if (layer.activation == Activation::ReLU) {
      for (double& v : a.span()) v = std::max(v, 0.0);
    }
    pass.pre.push_back(std::move(z));
    pass.post.push_back(std::move(a));
    x = &pass.post.back();
  }
  return pass;
}

RealGrid softmax(const RealGrid& logits) {
  RealGrid p(logits.rows(), logits.cols());
  for (std::size_t b = 0; b < logits.rows(); ++b) {
    const auto row = logits.row(b);
    const double mx = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (std::size_t k = 0; k < row.size(); ++k) {
      p(b, k) = std::exp(row[k] - mx);
      total += p(b, k);
    }
    for (std::size_t k = 0; k < row.size(); ++k) p(b, k) /= total;
  }
  return p;
}

CrossEntropy cross_entropy(const RealGrid& logits, std::span<const std::size_t> labels) {
  if (logits.rows() != labels.size() || logits.rows() == 0) {
    throw DimensionError("logits and labels disagree in batch size");
  }
  const std::size_t batch = logits.rows();
  const std::size_t classes = logits.cols();
  CrossEntropy out{0.0, softmax(logits)};
  for (std::size_t b = 0; b < batch; ++b) {
    if (labels[b] >= classes) throw InvariantError("label out of range");
    const auto row = logits.row(b);
    const double mx = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (double v : row) total += std::exp(v - mx);
    out.loss += (std::log(total) + mx) - row[labels[b]];
    out.grad_logits(b, labels[b]) -= 1.0;
  }
  const double inv = 1.0 / static_cast<double>(batch);
  out.loss *= inv;
  for (double& g : out.grad_logits.span()) g *= inv;
  return out;
}

RecognizerGradients backward(const RecognizerParams& params, const ForwardPass& pass,
                             const RealGrid& grad_logits, std::size_t input_rows,
                             std::size_t input_cols) {
  if (pass.empty() || pass.post.size() != params.layers.size()) {
    throw Error("backward called without a matching forward pass");
  }
  if (input_rows * input_cols != params.input_size) throw DimensionError("input shape mismatch");
  const std::size_t batch = pass.input.rows();
  if (grad_logits.rows() != batch || grad_logits.cols() != params.num_classes()) {
    throw DimensionError("grad_logits shape mismatch");
  }

  RecognizerGradients grads;
  grads.layers.resize(params.layers.size());
  RealGrid upstream = grad_logits;
  for (std::size_t li = params.layers.size(); li-- > 0;) {
    const DenseLayer& layer = params.layers[li];
    const RealGrid& z = pass.pre[li];
    const RealGrid& x = li == 0 ? pass.input : pass.post[li - 1];
    LayerGradients& g = grads.layers[li];
    g.weights = RealGrid(layer.outputs(), layer.inputs());
    g.bias.assign(layer.outputs(), 0.0);
    RealGrid downstream(batch, layer.inputs());
    for (std::size_t b = 0; b < batch; ++b) {
      const auto xb = x.row(b);
      auto db = downstream.row(b);
      for (std::size_t j = 0; j < layer.outputs(); ++j) {
        double gj = upstream(b, j);
        if (layer.activation == Activation::ReLU && z(b, j) <= 0.0) gj = 0.0;
        if (gj == 0.0) continue;
        g.bias[j] += gj;
        kernels::axpy(gj, xb, g.weights.row(j));
        kernels::axpy(gj, layer.weights.row(j), db);
      }
    }
    upstream = std::move(downstream);
  }
  grads.inputs.reserve(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    const auto row = upstream.row(b);
    grads.inputs.emplace_back(input_rows, input_cols, std::vector<double>(row.begin(), row.end()));
  }
  return grads;
}

void sgd_update(std::span<double> param, std::span<const double> grad, std::span<double> velocity,
                const SgdOptions& opt) {
  if (param.size() != grad.size() || param.size() != velocity.size()) {
    throw DimensionError("SGD tensor size mismatch");
  }
  for (std::size_t i = 0; i < param.size(); ++i) {
    velocity[i] = opt.momentum * velocity[i] + grad[i] + opt.weight_decay * param[i];
    param[i] -= opt.lr * velocity[i];
  }
}

void sgd_step(RecognizerParams& params, const RecognizerGradients& grads, SgdState& state,
              const SgdOptions& opt) {
  if (!(opt.lr > 0.0)) throw ConfigError("learning rate must be positive");
  if (grads.layers.size() != params.layers.size()) throw DimensionError("gradient layer mismatch");
  if (state.velocity.empty()) {
    for (const auto& l : params.layers) {
      state.velocity.push_back({RealGrid(l.outputs(), l.inputs()), std::vector<double>(l.outputs())});
    }
  }
  for (std::size_t li = 0; li < params.layers.size(); ++li) {
    sgd_update(params.layers[li].weights.span(), grads.layers[li].weights.span(),
               state.velocity[li].weights.span(), opt);
    sgd_update(params.layers[li].bias, grads.layers[li].bias, state.velocity[li].bias, opt);
  }
}

ContrastStretch contrast_stretch(const RealGrid& y) {
  if (y.empty()) throw DimensionError("empty measurement");
  ContrastStretch out;
  const auto values = y.span();
  out.argmin = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
  out.argmax = static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
  const double lo = values[out.argmin];
  out.range = values[out.argmax] - lo;
  out.output = RealGrid(y.rows(), y.cols());
  if (!(out.range > 1e-12 * std::max(1.0, std::abs(lo)))) {
    out.range = 0.0;
    return out;
  }
  for (std::size_t i = 0; i < values.size(); ++i) out.output[i] = (values[i] - lo) / out.range;
  return out;
}

RealGrid contrast_stretch_backward(const ContrastStretch& fwd, const RealGrid& grad_output) {
  if (!fwd.output.same_shape(grad_output)) throw DimensionError("contrast gradient shape mismatch");
  RealGrid g(grad_output.rows(), grad_output.cols());
  if (fwd.range == 0.0) return g;
  // z_i = (y_i - y_min) / R,  R = y_max - y_min
  double sum_g = 0.0;
  double sum_gz = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    sum_g += grad_output[i];
    sum_gz += grad_output[i] * fwd.output[i];
  }
  const double inv = 1.0 / fwd.range;
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = grad_output[i] * inv;
  g[fwd.argmin] += (sum_gz - sum_g) * inv;
  g[fwd.argmax] -= sum_gz * inv;
  return g;
}

std::size_t argmax_row(const RealGrid& logits, std::size_t row) {
  const auto r = logits.row(row);
  return static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
}

}  // namespace lensless
