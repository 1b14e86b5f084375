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

// LRU: complex diagonal recurrence parameterized directly in discrete time,
// lambda = exp(-exp(nu_log) + i exp(theta_log)), with the input normalized
// by gamma = exp(gamma_log).

#include <cmath>
#include <complex>
#include <numbers>

#include "layer_factories.hpp"
#include "linrec/autograd.hpp"
#include "mimo.hpp"

namespace linrec::detail {
namespace {

inline constexpr double kRMin = 0.9;
inline constexpr double kRMax = 0.999;
inline constexpr double kMaxPhase = std::numbers::pi / 10;

template <typename T>
class LRU final : public Layer<T> {
  using Base = Layer<T>;
  using typename Base::Consts;
  using C = std::complex<T>;
  enum { kLRe, kLIm, kGamma, kNumConsts };

 public:
  LRU(const LayerConfig& cfg, Rng& rng) : Base(LayerKind::kLRU, cfg) {
    const std::size_t d = cfg.d_model, n = cfg.d_state;
    auto& p = this->params_;
    auto& nu = p.add("nu_log", Tensor<T>(Shape{n}));
    auto& theta = p.add("theta_log", Tensor<T>(Shape{n}));
    auto& gamma = p.add("gamma_log", Tensor<T>(Shape{n}));
    for (std::size_t j = 0; j < n; ++j) {
      const double r = rng.uniform(kRMin, kRMax);
      nu[j] = static_cast<T>(std::log(-std::log(r)));
      theta[j] = static_cast<T>(std::log(kMaxPhase * rng.uniform()));
      // Normalizer from the stored (rounded) modulus.
      const T mod = std::exp(-std::exp(nu[j]));
      gamma[j] = std::log(std::sqrt(T(1) - mod * mod));
    }
    const double b_scale = std::sqrt(0.5 / static_cast<double>(d));
    for (const char* name : {"b_re", "b_im"}) rng.fill_normal(p.add(name, Tensor<T>(Shape{n, d})).data(), b_scale);
    const double c_scale = std::sqrt(0.5 / static_cast<double>(n));
    for (const char* name : {"c_re", "c_im"}) rng.fill_normal(p.add(name, Tensor<T>(Shape{d, n})).data(), c_scale);
    rng.fill_normal(p.add("d", Tensor<T>(Shape{d})).data());
  }

  std::size_t state_width() const override { return this->cfg_.d_state; }
  bool complex_state() const override { return true; }

 protected:
  bool invariant_a() const override { return true; }

  Consts prepare() const override {
    const std::size_t n = state_width();
    const auto& p = this->params_;
    const auto& nu = p.get("nu_log");
    const auto& theta = p.get("theta_log");
    const auto& gamma = p.get("gamma_log");
    Consts c(kNumConsts);
    for (auto& v : c) v.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      const C lambda = complex_exp(-std::exp(nu[j]), std::exp(theta[j]));
      c[kLRe][j] = lambda.real();
      c[kLIm][j] = lambda.imag();
      c[kGamma][j] = std::exp(gamma[j]);
    }
    return c;
  }

  void constant_a(const Consts& c, std::span<const T>& a_re, std::span<const T>& a_im) const override {
    a_re = c[kLRe];
    a_im = c[kLIm];
  }

  void transitions(const Consts& c, const T* u, const T*, std::size_t steps, T*, T*, T* b_re, T* b_im,
                   T*) const override {
    const std::size_t d = this->cfg_.d_model, n = state_width();
    const auto& p = this->params_;
    project_in(p.get("b_re").ptr(), p.get("b_im").ptr(), n, d, u, steps, b_re, b_im);
    const T* g = c[kGamma].data();
    for (std::size_t k = 0; k < steps; ++k)
      for (std::size_t j = 0; j < n; ++j) {
        b_re[k * n + j] *= g[j];
        b_im[k * n + j] *= g[j];
      }
  }

  void readout(const Consts&, const T* u, std::size_t steps, const T* x_re, const T* x_im, T* y,
               T*) const override {
    const auto& p = this->params_;
    project_out(p.get("c_re").ptr(), p.get("c_im").ptr(), p.get("d").ptr(), T(1), this->cfg_.d_model, state_width(),
                u, steps, x_re, x_im, y);
  }

  void backward_sequence(const Consts& c, std::span<const T> u, std::span<const T>, const CVec<T>& states,
                         std::span<const T> gy, GradBundle<T>& grads, std::span<T> du) const override {
    const std::size_t d = this->cfg_.d_model, n = state_width(), L = u.size() / d;
    const auto& p = this->params_;
    std::vector<T> gx_re(L * n), gx_im(L * n);
    project_out_backward(p.get("c_re").ptr(), p.get("c_im").ptr(), p.get("d").ptr(), T(1), d, n, u.data(), L,
                         states.re.data(), states.im.data(), gy.data(), gx_re.data(), gx_im.data(),
                         grads.get("c_re").ptr(), grads.get("c_im").ptr(), grads.get("d").ptr(), du.data());

    std::vector<T> w_re(L * n), w_im(L * n), b_re(L * n), b_im(L * n);
    project_in(p.get("b_re").ptr(), p.get("b_im").ptr(), n, d, u.data(), L, w_re.data(), w_im.data());
    for (std::size_t i = 0; i < L * n; ++i) {
      b_re[i] = w_re[i] * c[kGamma][i % n];
      b_im[i] = w_im[i] * c[kGamma][i % n];
    }
    ScanInput<T> in;
    in.length = L;
    in.width = n;
    in.time_invariant = true;
    constant_a(c, in.a_re, in.a_im);
    in.b_re = b_re;
    in.b_im = b_im;
    const auto sg = scan_backward<T>(in, states.re, states.im, gx_re, gx_im);

    auto& dnu = grads.get("nu_log");
    auto& dtheta = grads.get("theta_log");
    auto& dgamma = grads.get("gamma_log");
    std::vector<T> gw_re(L * n), gw_im(L * n);
    for (std::size_t j = 0; j < n; ++j) {
      const T gamma = c[kGamma][j];
      C g_lambda(0);
      T g_gamma = T(0);
      for (std::size_t k = 0; k < L; ++k) {
        const std::size_t i = k * n + j;
        g_lambda += C(sg.a.re[i], sg.a.im[i]);
        g_gamma += w_re[i] * sg.b.re[i] + w_im[i] * sg.b.im[i];
        gw_re[i] = gamma * sg.b.re[i];
        gw_im[i] = gamma * sg.b.im[i];
      }
      // lambda = exp(z), z = -exp(nu) + i exp(theta)
      const C g_z = std::conj(C(c[kLRe][j], c[kLIm][j])) * g_lambda;
      dnu[j] += -std::exp(p.get("nu_log")[j]) * g_z.real();
      dtheta[j] += std::exp(p.get("theta_log")[j]) * g_z.imag();
      dgamma[j] += gamma * g_gamma;
    }
    project_in_backward(p.get("b_re").ptr(), p.get("b_im").ptr(), n, d, u.data(), L, gw_re.data(), gw_im.data(),
                        grads.get("b_re").ptr(), grads.get("b_im").ptr(), du.data());
  }
};

}  // namespace

template <typename T>
std::unique_ptr<Layer<T>> make_lru(const LayerConfig& cfg, Rng& rng) {
  return std::make_unique<LRU<T>>(cfg, rng);
}

template std::unique_ptr<Layer<float>> make_lru<float>(const LayerConfig&, Rng&);
template std::unique_ptr<Layer<double>> make_lru<double>(const LayerConfig&, Rng&);

}  // namespace linrec::detail
