// Copyright 2026 The linrec Authors
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

// RG-LRU: real diagonal recurrence with input-dependent gates,
//   r_k = sigmoid(W_r u_k + b_r), i_k = sigmoid(W_i u_k + b_i),
//   a_k = sigmoid(lambda)^(c r_k),
//   x_k = a_k x_{k-1} + sqrt(1 - a_k^2) (i_k * W_in u_k),   y_k = W_out x_k.

#include <cmath>

#include "dense.hpp"
#include "layer_factories.hpp"
#include "linrec/autograd.hpp"

namespace linrec::detail {
namespace {

inline constexpr double kGateScale = 8.0;
inline constexpr double kAMin = 0.9;
inline constexpr double kAMax = 0.999;

template <typename T>
class RGLRU final : public Layer<T> {
  using Base = Layer<T>;
  using typename Base::Consts;
  enum { kLogA, kNumConsts };

 public:
  RGLRU(const LayerConfig& cfg, Rng& rng) : Base(LayerKind::kRGLRU, cfg) {
    const std::size_t d = cfg.d_model, n = cfg.d_state;
    auto& p = this->params_;
    // sigmoid(lambda)^c uniform in [kAMin, kAMax].
    auto& lambda = p.add("lambda", Tensor<T>(Shape{n}));
    for (std::size_t j = 0; j < n; ++j) {
      const double a = std::pow(rng.uniform(kAMin, kAMax), 1.0 / kGateScale);
      lambda[j] = static_cast<T>(std::log(a / (1.0 - a)));
    }
    const double in_scale = 1.0 / std::sqrt(static_cast<double>(d));
    rng.fill_normal(p.add("w_r", Tensor<T>(Shape{n, d})).data(), in_scale);
    rng.fill_normal(p.add("w_i", Tensor<T>(Shape{n, d})).data(), in_scale);
    rng.fill_normal(p.add("w_in", Tensor<T>(Shape{n, d})).data(), in_scale);
    p.add("b_r", Tensor<T>(Shape{n}));
    p.add("b_i", Tensor<T>(Shape{n}));
    rng.fill_normal(p.add("w_out", Tensor<T>(Shape{d, n})).data(), 1.0 / std::sqrt(static_cast<double>(n)));
  }

  std::size_t state_width() const override { return this->cfg_.d_state; }
  bool complex_state() const override { return false; }

 protected:
  bool invariant_a() const override { return false; }
  std::size_t scratch_size() const override { return 3 * this->cfg_.d_state; }

  Consts prepare() const override {
    const auto& lambda = this->params_.get("lambda");
    Consts c(kNumConsts);
    c[kLogA].resize(lambda.size());
    for (std::size_t j = 0; j < lambda.size(); ++j) c[kLogA][j] = -softplus(-lambda[j]);
    return c;
  }

  void constant_a(const Consts&, std::span<const T>&, std::span<const T>&) const override {}

  // Gate pre-activations and the projected input for one step.
  void gates(const T* uk, T* qr, T* qi, T* v) const {
    const std::size_t d = this->cfg_.d_model, n = this->cfg_.d_state;
    const auto& p = this->params_;
    matvec(p.get("w_r").ptr(), n, d, uk, qr);
    matvec(p.get("w_i").ptr(), n, d, uk, qi);
    matvec(p.get("w_in").ptr(), n, d, uk, v);
    const T* br = p.get("b_r").ptr();
    const T* bi = p.get("b_i").ptr();
    for (std::size_t j = 0; j < n; ++j) {
      qr[j] += br[j];
      qi[j] += bi[j];
    }
  }

  void transitions(const Consts& c, const T* u, const T*, std::size_t steps, T* a_re, T*, T* b_re, T*,
                   T* scratch) const override {
    const std::size_t d = this->cfg_.d_model, n = this->cfg_.d_state;
    T* qr = scratch;
    T* qi = qr + n;
    T* v = qi + n;
    for (std::size_t k = 0; k < steps; ++k) {
      gates(u + k * d, qr, qi, v);
      for (std::size_t j = 0; j < n; ++j) {
        const T q = T(kGateScale) * sigmoid(qr[j]) * c[kLogA][j];
        a_re[k * n + j] = std::exp(q);
        b_re[k * n + j] = std::sqrt(-std::expm1(T(2) * q)) * sigmoid(qi[j]) * v[j];
      }
    }
  }

  void readout(const Consts&, const T*, std::size_t steps, const T* x_re, const T*, T* y, T*) const override {
    const std::size_t d = this->cfg_.d_model, n = this->cfg_.d_state;
    matmul_nt(x_re, steps, this->params_.get("w_out").ptr(), d, n, y);
  }

  void backward_sequence(const Consts& c, std::span<const T> u, std::span<const T>, const CVec<T>& states,
                         std::span<const T> gy, GradBundle<T>& grads, std::span<T> du) const override {
    const std::size_t d = this->cfg_.d_model, n = this->cfg_.d_state, L = u.size() / d;
    const auto& p = this->params_;
    const T* w_out = p.get("w_out").ptr();
    std::vector<T> gx(L * n, T(0));
    for (std::size_t k = 0; k < L; ++k) {
      outer_acc(grads.get("w_out").ptr(), d, n, gy.data() + k * d, states.re.data() + k * n);
      matvec_t_acc(w_out, d, n, gy.data() + k * d, gx.data() + k * n);
    }

    std::vector<T> a(L * n), b(L * n), scratch(scratch_size());
    transitions(c, u.data(), nullptr, L, a.data(), nullptr, b.data(), nullptr, scratch.data());
    ScanInput<T> in;
    in.length = L;
    in.width = n;
    in.a_re = a;
    in.b_re = b;
    const auto sg = scan_backward<T>(in, states.re, {}, gx, {});

    const T* w_r = p.get("w_r").ptr();
    const T* w_i = p.get("w_i").ptr();
    const T* w_in = p.get("w_in").ptr();
    T* g_wr = grads.get("w_r").ptr();
    T* g_wi = grads.get("w_i").ptr();
    T* g_win = grads.get("w_in").ptr();
    T* g_br = grads.get("b_r").ptr();
    T* g_bi = grads.get("b_i").ptr();
    std::vector<T> qr(n), qi(n), v(n), dqr(n), dqi(n), dv(n), dla(n, T(0));
    for (std::size_t k = 0; k < L; ++k) {
      const T* uk = u.data() + k * d;
      T* duk = du.data() + k * d;
      gates(uk, qr.data(), qi.data(), v.data());
      for (std::size_t j = 0; j < n; ++j) {
        const T r = sigmoid(qr[j]), ig = sigmoid(qi[j]);
        const T q = T(kGateScale) * r * c[kLogA][j];
        const T ak = std::exp(q);
        const T mult = std::sqrt(-std::expm1(T(2) * q));
        const T gb = sg.b.re[k * n + j];
        const T ga = sg.a.re[k * n + j];
        const T dmult = gb * ig * v[j];
        dv[j] = gb * mult * ig;
        const T dig = gb * mult * v[j];
        // d mult / d a = -a / mult
        const T da = ga + (mult > T(0) ? -dmult * ak / mult : T(0));
        const T dq = da * ak;
        dla[j] += dq * T(kGateScale) * r;
        dqr[j] = dq * T(kGateScale) * c[kLogA][j] * r * (T(1) - r);
        dqi[j] = dig * ig * (T(1) - ig);
        g_br[j] += dqr[j];
        g_bi[j] += dqi[j];
      }
      outer_acc(g_wr, n, d, dqr.data(), uk);
      outer_acc(g_wi, n, d, dqi.data(), uk);
      outer_acc(g_win, n, d, dv.data(), uk);
      matvec_t_acc(w_r, n, d, dqr.data(), duk);
      matvec_t_acc(w_i, n, d, dqi.data(), duk);
      matvec_t_acc(w_in, n, d, dv.data(), duk);
    }
    const auto& lambda = p.get("lambda");
    T* g_lambda = grads.get("lambda").ptr();
    for (std::size_t j = 0; j < n; ++j) g_lambda[j] += dla[j] * sigmoid(-lambda[j]);
  }
};

}  // namespace

template <typename T>
std::unique_ptr<Layer<T>> make_rglru(const LayerConfig& cfg, Rng& rng) {
  return std::make_unique<RGLRU<T>>(cfg, rng);
}

template std::unique_ptr<Layer<float>> make_rglru<float>(const LayerConfig&, Rng&);
template std::unique_ptr<Layer<double>> make_rglru<double>(const LayerConfig&, Rng&);

}  // namespace linrec::detail
