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

// S6 (selective scan): real diagonal SISO recurrence whose step size and
// input/output maps are functions of the current input,
//   delta_k = softplus(W_delta (W_down u_k) + b_delta),
//   B_k = W_B u_k, C_k = W_C u_k,
//   x_k = exp(delta_k a) x_{k-1} + delta_k B_k u_k,   y_k = C_k x_k + D u_k.
// The zoh setting uses the Euler input map shown above; bilinear and dirac
// use their regular input gains.

#include <cmath>

#include "dense.hpp"
#include "layer_factories.hpp"
#include "linrec/autograd.hpp"

namespace linrec::detail {
namespace {

template <typename T>
TransitionJet<T> s6_jet(Discretization scheme, T a, T delta) {
  if (scheme != Discretization::kZoh) return transition_jet(scheme, a, delta);
  TransitionJet<T> j = dirac_jet(a, delta);
  j.gain = delta;
  j.dgain_da = T(0);
  j.dgain_ddelta = T(1);
  return j;
}

template <typename T>
T softplus_grad(T x) {
  return x > softplus_threshold<T>() ? T(1) : sigmoid(x);
}

template <typename T>
class S6 final : public Layer<T> {
  using Base = Layer<T>;
  using typename Base::Consts;
  enum { kA, kNumConsts };

 public:
  S6(const LayerConfig& cfg, Rng& rng) : Base(LayerKind::kS6, cfg) {
    if (this->cfg_.d_rank == 0) this->cfg_.d_rank = default_delta_rank(cfg.d_model);
    const std::size_t d = cfg.d_model, n = cfg.d_state, r = this->cfg_.d_rank;
    auto& p = this->params_;
    auto& a_log = p.add("a_log", Tensor<T>(Shape{d, n}));
    for (std::size_t h = 0; h < d; ++h)
      for (std::size_t j = 0; j < n; ++j) a_log(h, j) = static_cast<T>(std::log(static_cast<double>(j + 1)));
    const double in_scale = 1.0 / std::sqrt(static_cast<double>(d));
    rng.fill_normal(p.add("w_b", Tensor<T>(Shape{n, d})).data(), in_scale);
    rng.fill_normal(p.add("w_c", Tensor<T>(Shape{n, d})).data(), in_scale);
    rng.fill_normal(p.add("w_delta_down", Tensor<T>(Shape{r, d})).data(), in_scale);
    const double up = 1.0 / std::sqrt(static_cast<double>(r));
    rng.fill_uniform(p.add("w_delta", Tensor<T>(Shape{d, r})).data(), -up, up);
    // Bias is the inverse softplus of a log-uniform step in [1e-3, 1e-1].
    auto& bias = p.add("b_delta", Tensor<T>(Shape{d}));
    for (std::size_t h = 0; h < d; ++h) {
      const double dt = std::exp(rng.uniform(std::log(1e-3), std::log(1e-1)));
      bias[h] = static_cast<T>(dt + std::log(-std::expm1(-dt)));
    }
    p.add("d", Tensor<T>(Shape{d}, T(1)));
  }

  std::size_t state_width() const override { return this->cfg_.d_model * this->cfg_.d_state; }
  bool complex_state() const override { return false; }

 protected:
  bool invariant_a() const override { return false; }
  std::size_t scratch_size() const override {
    return this->cfg_.d_rank + this->cfg_.d_model + 2 * this->cfg_.d_state;
  }

  Consts prepare() const override {
    const auto& a_log = this->params_.get("a_log");
    Consts c(kNumConsts);
    c[kA].resize(a_log.size());
    for (std::size_t i = 0; i < a_log.size(); ++i) c[kA][i] = -std::exp(a_log[i]);
    return c;
  }

  void constant_a(const Consts&, std::span<const T>&, std::span<const T>&) const override {}

  // z = W_down u, s = W_delta z + b_delta (pre-activation of delta).
  void delta_inputs(const T* uk, T* z, T* s) const {
    const std::size_t d = this->cfg_.d_model, r = this->cfg_.d_rank;
    const auto& p = this->params_;
    matvec(p.get("w_delta_down").ptr(), r, d, uk, z);
    matvec(p.get("w_delta").ptr(), d, r, z, s);
    const T* bias = p.get("b_delta").ptr();
    for (std::size_t h = 0; h < d; ++h) s[h] += bias[h];
  }

  void transitions(const Consts& c, const T* u, const T*, std::size_t steps, T* a_re, T*, T* b_re, T*,
                   T* scratch) const override {
    const std::size_t d = this->cfg_.d_model, n = this->cfg_.d_state, r = this->cfg_.d_rank, w = d * n;
    T* z = scratch;
    T* delta = z + r;
    T* bk = delta + d;
    const T* w_b = this->params_.get("w_b").ptr();
    const auto scheme = this->cfg_.scheme();
    for (std::size_t k = 0; k < steps; ++k) {
      const T* uk = u + k * d;
      delta_inputs(uk, z, delta);
      for (std::size_t h = 0; h < d; ++h) delta[h] = softplus(delta[h]);
      matvec(w_b, n, d, uk, bk);
      T* ak = a_re + k * w;
      T* bkout = b_re + k * w;
      for (std::size_t h = 0; h < d; ++h)
        for (std::size_t j = 0; j < n; ++j) {
          const std::size_t i = h * n + j;
          const T a = c[kA][i];
          T a_bar, gain;
          switch (scheme) {
            case Discretization::kZoh:
              a_bar = std::exp(delta[h] * a);
              gain = delta[h];
              break;
            case Discretization::kDirac:
              a_bar = std::exp(delta[h] * a);
              gain = T(1);
              break;
            default: {
              const auto t = discretize(scheme, a, T(1), delta[h]);
              a_bar = t.a_bar;
              gain = t.b_bar;
            }
          }
          ak[i] = a_bar;
          bkout[i] = gain * bk[j] * uk[h];
        }
    }
  }

  void readout(const Consts&, const T* u, std::size_t steps, const T* x_re, const T*, T* y,
               T* scratch) const override {
    const std::size_t d = this->cfg_.d_model, n = this->cfg_.d_state, w = d * n;
    T* ck = scratch + this->cfg_.d_rank + d + n;
    const T* w_c = this->params_.get("w_c").ptr();
    const T* dd = this->params_.get("d").ptr();
    for (std::size_t k = 0; k < steps; ++k) {
      const T* uk = u + k * d;
      matvec(w_c, n, d, uk, ck);
      const T* xk = x_re + k * w;
      for (std::size_t h = 0; h < d; ++h) {
        T s = T(0);
        for (std::size_t j = 0; j < n; ++j) s += ck[j] * xk[h * n + j];
        y[k * d + h] = s + dd[h] * uk[h];
      }
    }
  }

  void backward_sequence(const Consts& c, std::span<const T> u, std::span<const T>, const CVec<T>& states,
                         std::span<const T> gy, GradBundle<T>& grads, std::span<T> du) const override {
    const std::size_t d = this->cfg_.d_model, n = this->cfg_.d_state, r = this->cfg_.d_rank, w = d * n;
    const std::size_t L = u.size() / d;
    const auto& p = this->params_;
    const T* w_b = p.get("w_b").ptr();
    const T* w_c = p.get("w_c").ptr();
    const T* w_down = p.get("w_delta_down").ptr();
    const T* w_up = p.get("w_delta").ptr();
    const T* dvec = p.get("d").ptr();
    T* g_wb = grads.get("w_b").ptr();
    T* g_wc = grads.get("w_c").ptr();
    T* g_down = grads.get("w_delta_down").ptr();
    T* g_up = grads.get("w_delta").ptr();
    T* g_bias = grads.get("b_delta").ptr();
    T* g_d = grads.get("d").ptr();

    std::vector<T> z(r), s(d), bk(n), ck(n), dck(n), dbk(n), ddelta(d), dz(r), da(w, T(0));
    std::vector<T> gx(L * w);
    for (std::size_t k = 0; k < L; ++k) {
      const T* uk = u.data() + k * d;
      T* duk = du.data() + k * d;
      const T* xk = states.re.data() + k * w;
      matvec(w_c, n, d, uk, ck.data());
      std::fill(dck.begin(), dck.end(), T(0));
      for (std::size_t h = 0; h < d; ++h) {
        const T g = gy[k * d + h];
        g_d[h] += g * uk[h];
        duk[h] += dvec[h] * g;
        for (std::size_t j = 0; j < n; ++j) {
          gx[k * w + h * n + j] = g * ck[j];
          dck[j] += g * xk[h * n + j];
        }
      }
      outer_acc(g_wc, n, d, dck.data(), uk);
      matvec_t_acc(w_c, n, d, dck.data(), duk);
    }

    std::vector<T> a(L * w), b(L * w), scratch(scratch_size());
    transitions(c, u.data(), nullptr, L, a.data(), nullptr, b.data(), nullptr, scratch.data());
    ScanInput<T> in;
    in.length = L;
    in.width = w;
    in.a_re = a;
    in.b_re = b;
    const auto sg = scan_backward<T>(in, states.re, {}, gx, {});

    const auto scheme = this->cfg_.scheme();
    for (std::size_t k = 0; k < L; ++k) {
      const T* uk = u.data() + k * d;
      T* duk = du.data() + k * d;
      delta_inputs(uk, z.data(), s.data());
      matvec(w_b, n, d, uk, bk.data());
      std::fill(dbk.begin(), dbk.end(), T(0));
      std::fill(ddelta.begin(), ddelta.end(), T(0));
      for (std::size_t h = 0; h < d; ++h) {
        const T delta = softplus(s[h]);
        for (std::size_t j = 0; j < n; ++j) {
          const std::size_t i = h * n + j;
          const T g = sg.b.re[k * w + i];
          const T ga = sg.a.re[k * w + i];
          const auto jet = s6_jet(scheme, c[kA][i], delta);
          const T dgain = g * bk[j] * uk[h];
          dbk[j] += g * jet.gain * uk[h];
          duk[h] += g * jet.gain * bk[j];
          da[i] += ga * jet.da_bar_da + dgain * jet.dgain_da;
          ddelta[h] += ga * jet.da_bar_ddelta + dgain * jet.dgain_ddelta;
        }
      }
      outer_acc(g_wb, n, d, dbk.data(), uk);
      matvec_t_acc(w_b, n, d, dbk.data(), duk);
      for (std::size_t h = 0; h < d; ++h) {
        ddelta[h] *= softplus_grad(s[h]);
        g_bias[h] += ddelta[h];
      }
      outer_acc(g_up, d, r, ddelta.data(), z.data());
      std::fill(dz.begin(), dz.end(), T(0));
      matvec_t_acc(w_up, d, r, ddelta.data(), dz.data());
      outer_acc(g_down, r, d, dz.data(), uk);
      matvec_t_acc(w_down, r, d, dz.data(), duk);
    }
    T* g_alog = grads.get("a_log").ptr();
    for (std::size_t i = 0; i < w; ++i) g_alog[i] += da[i] * c[kA][i];
  }
};

}  // namespace

template <typename T>
std::unique_ptr<Layer<T>> make_s6(const LayerConfig& cfg, Rng& rng) {
  return std::make_unique<S6<T>>(cfg, rng);
}

template std::unique_ptr<Layer<float>> make_s6<float>(const LayerConfig&, Rng&);
template std::unique_ptr<Layer<double>> make_s6<double>(const LayerConfig&, Rng&);

}  // namespace linrec::detail
