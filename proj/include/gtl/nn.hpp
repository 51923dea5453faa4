// Copyright 2026 The GNN Transfer Lab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Dense layers with explicit reverse-mode methods.
//
// Every layer caches what it needs during forward(); backward(dy) then
// accumulates dLoss/dParam into each Parameter's grad and returns dLoss/dInput.
// One backward per forward: a second forward overwrites the cache.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gtl/rng.hpp"
#include "gtl/tensor.hpp"

namespace gtl {

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  bool trainable = true;

  Parameter() = default;
  Parameter(std::string name_in, Tensor value_in)
      : name(std::move(name_in)), value(std::move(value_in)), grad(value.rows(), value.cols()) {}

  void zero_grad() { grad.fill(0.0); }
};

/// Fills `t` from U(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
void glorot_uniform(Tensor& t, Rng& rng);

/// y = x W (+ b). W is in x out, b is 1 x out.
class Linear {
 public:
  Linear() = default;
  Linear(std::size_t in_dim, std::size_t out_dim, bool bias, const std::string& name);

  /// Glorot-uniform weights, zero bias.
  void reset_parameters(Rng& rng);

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);

  std::size_t in_dim() const { return weight.value.rows(); }
  std::size_t out_dim() const { return weight.value.cols(); }
  bool has_bias() const { return has_bias_; }
  void collect(std::vector<Parameter*>& out);

  Parameter weight;
  Parameter bias;

 private:
  bool has_bias_ = false;
  Tensor input_;
};

/// Per-feature batch normalisation. Training mode normalises with batch
/// statistics (biased variance) and updates running statistics with
/// `momentum`; evaluation mode uses the running statistics.
class BatchNorm {
 public:
  BatchNorm() = default;
  BatchNorm(std::size_t dim, const std::string& name, double momentum = 0.1, double eps = 1e-5);

  Tensor forward(const Tensor& x, bool train);
  Tensor backward(const Tensor& dy);

  void collect(std::vector<Parameter*>& out);

  Parameter gamma;
  Parameter beta;
  Tensor running_mean;
  Tensor running_var;

 private:
  double momentum_ = 0.1;
  double eps_ = 1e-5;
  bool trained_pass_ = false;
  Tensor normalized_;
  std::vector<double> inv_std_;
};

class Relu {
 public:
  Tensor forward(const Tensor& x);
  /// Passes gradient only where the input was strictly positive.
  Tensor backward(const Tensor& dy) const;

 private:
  Tensor input_;
};

/// Inverted dropout: in training mode each entry is zeroed with probability
/// p and survivors are scaled by 1 / (1 - p). Identity in evaluation mode and
/// for p = 0.
class Dropout {
 public:
  explicit Dropout(double p = 0.5);

  Tensor forward(const Tensor& x, bool train, Rng& rng);
  Tensor backward(const Tensor& dy) const;
  double p() const { return p_; }

 private:
  double p_;
  bool active_ = false;
  Tensor scale_;
};

struct LossResult {
  double loss = 0.0;
  Tensor grad;  // dLoss/dLogits
};

/// Mean over rows of -log softmax(logits)[label]. Gradient
/// (softmax - onehot) / N.
LossResult softmax_cross_entropy(const Tensor& logits, std::span<const int> labels);

/// Mean logistic loss on an N x 1 logit column with labels in {0, 1}.
LossResult binary_logistic_loss(const Tensor& logits, std::span<const int> labels);

/// Bias-corrected Adam.
class AdamState {
 public:
  explicit AdamState(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}

  long step() const { return step_; }

 private:
  friend void adam_step(std::span<Parameter* const> params, AdamState& state, double lr);
  double beta1_, beta2_, eps_;
  long step_ = 0;
  std::vector<Tensor> first_;
  std::vector<Tensor> second_;
};

/// One Adam update of every trainable parameter, then zeroes all gradients.
/// Moments are keyed by position in `params`, so pass the same list every
/// step.
void adam_step(std::span<Parameter* const> params, AdamState& state, double lr);

void zero_grads(std::span<Parameter* const> params);

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

/// Compares analytic gradients against central differences.
///
/// `compute_gradients` must zero nothing itself: gradient_check zeroes the
/// parameters' grads, calls it once (forward + backward), then perturbs each
/// coordinate by +-h and calls `loss`. The relative error of a coordinate is
/// |a - n| / max(|a|, |n|, 1e-6), so gradients that are both tiny are
/// compared on an absolute 1e-6 scale. Throws NumericError on non-finite
/// values.
GradCheckResult gradient_check(const std::function<double()>& loss,
                               const std::function<void()>& compute_gradients,
                               std::span<Parameter* const> params, double h = 1e-5);

}  // namespace gtl
