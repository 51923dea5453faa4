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

#include "gtl/nn.hpp"

#include <algorithm>
#include <cmath>

#include "gtl/errors.hpp"

namespace gtl {

void glorot_uniform(Tensor& t, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(t.rows() + t.cols()));
  for (double& v : t.values()) v = rng.uniform(-bound, bound);
}

Linear::Linear(std::size_t in_dim, std::size_t out_dim, bool bias, const std::string& name)
    : weight(name + ".weight", Tensor(in_dim, out_dim)),
      bias(name + ".bias", Tensor(1, bias ? out_dim : 0)),
      has_bias_(bias) {}

void Linear::reset_parameters(Rng& rng) {
  glorot_uniform(weight.value, rng);
  bias.value.fill(0.0);
}

Tensor Linear::forward(const Tensor& x) {
  input_ = x;
  Tensor y = matmul(x, weight.value);
  return has_bias_ ? add_bias(y, bias.value) : y;
}

Tensor Linear::backward(const Tensor& dy) {
  if (dy.rows() != input_.rows() || dy.cols() != out_dim())
    throw InputError("Linear::backward: gradient shape " + dy.shape_string() +
                     " does not match the cached forward");
  if (weight.trainable) add_inplace(weight.grad, matmul_tn(input_, dy));
  if (has_bias_ && bias.trainable) add_inplace(bias.grad, column_sums(dy));
  return matmul_nt(dy, weight.value);
}

void Linear::collect(std::vector<Parameter*>& out) {
  out.push_back(&weight);
  if (has_bias_) out.push_back(&bias);
}

BatchNorm::BatchNorm(std::size_t dim, const std::string& name, double momentum, double eps)
    : gamma(name + ".gamma", Tensor(1, dim, 1.0)),
      beta(name + ".beta", Tensor(1, dim, 0.0)),
      running_mean(1, dim, 0.0),
      running_var(1, dim, 1.0),
      momentum_(momentum),
      eps_(eps) {}

Tensor BatchNorm::forward(const Tensor& x, bool train) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (d != gamma.value.cols())
    throw InputError("BatchNorm: expected " + std::to_string(gamma.value.cols()) +
                     " features, got " + x.shape_string());
  std::vector<double> mean(d, 0.0), var(d, 0.0);
  if (train) {
    if (n < 2) throw InputError("BatchNorm: training mode needs at least 2 rows");
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < d; ++c) mean[c] += x(r, c);
    for (double& m : mean) m /= static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < d; ++c) {
        const double diff = x(r, c) - mean[c];
        var[c] += diff * diff;
      }
    for (double& v : var) v /= static_cast<double>(n);
    const double unbias = static_cast<double>(n) / static_cast<double>(n - 1);
    for (std::size_t c = 0; c < d; ++c) {
      running_mean(0, c) = (1.0 - momentum_) * running_mean(0, c) + momentum_ * mean[c];
      running_var(0, c) = (1.0 - momentum_) * running_var(0, c) + momentum_ * var[c] * unbias;
    }
  } else {
    for (std::size_t c = 0; c < d; ++c) {
      mean[c] = running_mean(0, c);
      var[c] = running_var(0, c);
    }
  }
  trained_pass_ = train;
  inv_std_.resize(d);
  for (std::size_t c = 0; c < d; ++c) inv_std_[c] = 1.0 / std::sqrt(var[c] + eps_);
  normalized_ = Tensor(n, d);
  Tensor y(n, d);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) {
      const double xhat = (x(r, c) - mean[c]) * inv_std_[c];
      normalized_(r, c) = xhat;
      y(r, c) = gamma.value(0, c) * xhat + beta.value(0, c);
    }
  return y;
}

Tensor BatchNorm::backward(const Tensor& dy) {
  if (!dy.same_shape(normalized_))
    throw InputError("BatchNorm::backward: gradient shape " + dy.shape_string() +
                     " does not match the cached forward");
  const std::size_t n = dy.rows();
  const std::size_t d = dy.cols();
  std::vector<double> sum_dy(d, 0.0), sum_dy_xhat(d, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) {
      sum_dy[c] += dy(r, c);
      sum_dy_xhat[c] += dy(r, c) * normalized_(r, c);
    }
  if (gamma.trainable)
    for (std::size_t c = 0; c < d; ++c) gamma.grad(0, c) += sum_dy_xhat[c];
  if (beta.trainable)
    for (std::size_t c = 0; c < d; ++c) beta.grad(0, c) += sum_dy[c];

  Tensor dx(n, d);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) {
      const double scale = gamma.value(0, c) * inv_std_[c];
      if (trained_pass_) {
        // Batch statistics depend on every row.
        dx(r, c) = scale * (dy(r, c) - inv_n * sum_dy[c] -
                            normalized_(r, c) * inv_n * sum_dy_xhat[c]);
      } else {
        dx(r, c) = scale * dy(r, c);
      }
    }
  return dx;
}

void BatchNorm::collect(std::vector<Parameter*>& out) {
  out.push_back(&gamma);
  out.push_back(&beta);
}

Tensor Relu::forward(const Tensor& x) {
  input_ = x;
  Tensor y = x;
  for (double& v : y.values()) v = v > 0.0 ? v : 0.0;
  return y;
}

Tensor Relu::backward(const Tensor& dy) const {
  if (!dy.same_shape(input_))
    throw InputError("Relu::backward: gradient shape " + dy.shape_string() +
                     " does not match the cached forward");
  Tensor dx = dy;
  auto in = input_.values();
  auto out = dx.values();
  for (std::size_t i = 0; i < out.size(); ++i)
    if (!(in[i] > 0.0)) out[i] = 0.0;
  return dx;
}

Dropout::Dropout(double p) : p_(p) {
  if (!(p >= 0.0 && p < 1.0)) throw InputError("dropout probability must be in [0, 1)");
}

Tensor Dropout::forward(const Tensor& x, bool train, Rng& rng) {
  active_ = train && p_ > 0.0;
  if (!active_) return x;
  const double keep_scale = 1.0 / (1.0 - p_);
  scale_ = Tensor(x.rows(), x.cols());
  Tensor y = x;
  auto s = scale_.values();
  auto out = y.values();
  for (std::size_t i = 0; i < out.size(); ++i) {
    s[i] = rng.uniform() < p_ ? 0.0 : keep_scale;
    out[i] *= s[i];
  }
  return y;
}

Tensor Dropout::backward(const Tensor& dy) const {
  if (!active_) return dy;
  if (!dy.same_shape(scale_))
    throw InputError("Dropout::backward: gradient shape " + dy.shape_string() +
                     " does not match the cached forward");
  Tensor dx = dy;
  auto s = scale_.values();
  auto out = dx.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= s[i];
  return dx;
}

LossResult softmax_cross_entropy(const Tensor& logits, std::span<const int> labels) {
  const std::size_t n = logits.rows();
  const std::size_t k = logits.cols();
  if (labels.size() != n)
    throw InputError("softmax_cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                     logits.shape_string() + " logits");
  if (n == 0 || k == 0) throw InputError("softmax_cross_entropy: empty logits");
  LossResult out;
  out.grad = Tensor(n, k);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r) {
    const int label = labels[r];
    if (label < 0 || static_cast<std::size_t>(label) >= k)
      throw InputError("softmax_cross_entropy: label " + std::to_string(label) +
                       " outside [0, " + std::to_string(k) + ")");
    auto row = logits.row(r);
    const double peak = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (double z : row) total += std::exp(z - peak);
    const double log_total = std::log(total) + peak;
    out.loss += (log_total - row[static_cast<std::size_t>(label)]) * inv_n;
    for (std::size_t c = 0; c < k; ++c) {
      const double prob = std::exp(row[c] - log_total);
      out.grad(r, c) = (prob - (static_cast<int>(c) == label ? 1.0 : 0.0)) * inv_n;
    }
  }
  return out;
}

LossResult binary_logistic_loss(const Tensor& logits, std::span<const int> labels) {
  const std::size_t n = logits.rows();
  if (logits.cols() != 1 || labels.size() != n)
    throw InputError("binary_logistic_loss: expected N x 1 logits and N labels, got " +
                     logits.shape_string() + " and " + std::to_string(labels.size()));
  if (n == 0) throw InputError("binary_logistic_loss: empty logits");
  LossResult out;
  out.grad = Tensor(n, 1);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r) {
    const int y = labels[r];
    if (y != 0 && y != 1)
      throw InputError("binary_logistic_loss: label " + std::to_string(y) + " is not 0 or 1");
    const double z = logits(r, 0);
    // log(1 + exp(z)) - y z, written to avoid overflow.
    out.loss += (std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)))) * inv_n;
    const double sigmoid = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    out.grad(r, 0) = (sigmoid - y) * inv_n;
  }
  return out;
}

void zero_grads(std::span<Parameter* const> params) {
  for (Parameter* p : params) p->zero_grad();
}

void adam_step(std::span<Parameter* const> params, AdamState& state, double lr) {
  if (state.first_.empty()) {
    for (const Parameter* p : params) {
      state.first_.emplace_back(p->value.rows(), p->value.cols());
      state.second_.emplace_back(p->value.rows(), p->value.cols());
    }
  }
  if (state.first_.size() != params.size())
    throw InputError("adam_step: parameter list changed between steps");
  ++state.step_;
  const double t = static_cast<double>(state.step_);
  const double correct1 = 1.0 - std::pow(state.beta1_, t);
  const double correct2 = 1.0 - std::pow(state.beta2_, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = *params[i];
    if (!p.value.same_shape(state.first_[i]))
      throw InputError("adam_step: moment shape mismatch for " + p.name);
    if (p.trainable) {
      auto value = p.value.values();
      auto grad = p.grad.values();
      auto m = state.first_[i].values();
      auto v = state.second_[i].values();
      for (std::size_t j = 0; j < value.size(); ++j) {
        m[j] = state.beta1_ * m[j] + (1.0 - state.beta1_) * grad[j];
        v[j] = state.beta2_ * v[j] + (1.0 - state.beta2_) * grad[j] * grad[j];
        const double m_hat = m[j] / correct1;
        const double v_hat = v[j] / correct2;
        value[j] -= lr * m_hat / (std::sqrt(v_hat) + state.eps_);
      }
    }
    p.zero_grad();
  }
}

GradCheckResult gradient_check(const std::function<double()>& loss,
                               const std::function<void()>& compute_gradients,
                               std::span<Parameter* const> params, double h) {
  zero_grads(params);
  compute_gradients();
  GradCheckResult result;
  for (Parameter* p : params) {
    const Tensor analytic = p->grad;
    if (!analytic.all_finite())
      throw NumericError("gradient_check: non-finite analytic gradient in " + p->name);
    auto value = p->value.values();
    for (std::size_t j = 0; j < value.size(); ++j) {
      const double saved = value[j];
      value[j] = saved + h;
      const double up = loss();
      value[j] = saved - h;
      const double down = loss();
      value[j] = saved;
      if (!std::isfinite(up) || !std::isfinite(down))
        throw NumericError("gradient_check: non-finite loss while perturbing " + p->name);
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic.values()[j];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-6});
      const double err = std::abs(a - numeric) / denom;
      if (result.worst_parameter.empty() || err > result.max_relative_error) {
        result.max_relative_error = err;
        result.worst_parameter = p->name;
        result.worst_index = j;
        result.analytic = a;
        result.numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace gtl
