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

// S5: a shared complex diagonal state driven by all channels (MIMO). Only
// one member of each conjugate pole pair is stored; the readout takes
// 2 Re(C x) to account for the partner.

#include <cmath>
#include <complex>
#include <numbers>

#include "layer_factories.hpp"
#include "linrec/autograd.hpp"
#include "mimo.hpp"

namespace linrec::detail {
namespace {

template <typename T>
class S5 final : public Layer<T> {
  using Base = Layer<T>;
  using typename Base::Consts;
  using C = std::complex<T>;
  enum { kARe, kAIm, kGRe, kGIm, kDeltaBase, kNumConsts };

 public:
  S5(const LayerConfig& cfg, Rng& rng) : Base(LayerKind::kS5, cfg) {
    require(cfg.d_state % 2 == 0, ErrorCode::kConfigError,
            "s5 stores conjugate pole pairs and needs an even d_state, got " + std::to_string(cfg.d_state));
    const std::size_t d = cfg.d_model, P = cfg.d_state / 2;
    auto& p = this->params_;
    p.add("lambda_re_log", Tensor<T>(Shape{P}, static_cast<T>(std::log(0.5))));
    auto& lim = p.add("lambda_im", Tensor<T>(Shape{P}));
    for (std::size_t j = 0; j < P; ++j) lim[j] = static_cast<T>(std::numbers::pi * static_cast<double>(j));
    const double b_scale = std::sqrt(0.5 / static_cast<double>(d));
    for (const char* name : {"b_re", "b_im"}) rng.fill_normal(p.add(name, Tensor<T>(Shape{P, d})).data(), b_scale);
    const double c_scale = std::sqrt(0.5 / static_cast<double>(cfg.d_state));
    for (const char* name : {"c_re", "c_im"}) rng.fill_normal(p.add(name, Tensor<T>(Shape{d, P})).data(), c_scale);
    rng.fill_normal(p.add("d", Tensor<T>(Shape{d})).data());
    rng.fill_uniform(p.add("log_delta", Tensor<T>(Shape{P})).data(), std::log(1e-3), std::log(1e-1));
  }

  std::size_t state_width() const override { return this->cfg_.d_state / 2; }
  bool complex_state() const override { return true; }

 protected:
  bool invariant_a() const override { return !this->cfg_.async; }

  C pole(std::size_t j) const {
    const auto& p = this->params_;
    return C(-std::exp(p.get("lambda_re_log")[j]), p.get("lambda_im")[j]);
  }

  Consts prepare() const override {
    const std::size_t P = state_width();
    const auto& log_delta = this->params_.get("log_delta");
    Consts c(kNumConsts);
    for (auto& v : c) v.resize(P);
    for (std::size_t j = 0; j < P; ++j) {
      const C a = pole(j);
      c[kDeltaBase][j] = std::exp(log_delta[j]);
      if (this->cfg_.async) {
        c[kARe][j] = a.real();
        c[kAIm][j] = a.imag();
      } else {
        const auto t = discretize(this->cfg_.scheme(), a, C(1), c[kDeltaBase][j]);
        c[kARe][j] = t.a_bar.real();
        c[kAIm][j] = t.a_bar.imag();
        c[kGRe][j] = t.b_bar.real();
        c[kGIm][j] = t.b_bar.imag();
      }
    }
    return c;
  }

  void constant_a(const Consts& c, std::span<const T>& a_re, std::span<const T>& a_im) const override {
    a_re = c[kARe];
    a_im = c[kAIm];
  }

  void transitions(const Consts& c, const T* u, const T* dt, std::size_t steps, T* a_re, T* a_im, T* b_re, T* b_im,
                   T*) const override {
    const std::size_t d = this->cfg_.d_model, P = state_width();
    const auto& p = this->params_;
    project_in(p.get("b_re").ptr(), p.get("b_im").ptr(), P, d, u, steps, b_re, b_im);
    for (std::size_t k = 0; k < steps; ++k)
      for (std::size_t j = 0; j < P; ++j) {
        C gain;
        if (this->cfg_.async) {
          const auto t = discretize(this->cfg_.scheme(), C(c[kARe][j], c[kAIm][j]), C(1), c[kDeltaBase][j] * dt[k]);
          a_re[k * P + j] = t.a_bar.real();
          a_im[k * P + j] = t.a_bar.imag();
          gain = t.b_bar;
        } else {
          gain = C(c[kGRe][j], c[kGIm][j]);
        }
        const std::size_t i = k * P + j;
        const T wr = b_re[i], wi = b_im[i];
        b_re[i] = gain.real() * wr - gain.imag() * wi;
        b_im[i] = gain.real() * wi + gain.imag() * wr;
      }
  }

  void readout(const Consts&, const T* u, std::size_t steps, const T* x_re, const T* x_im, T* y,
               T*) const override {
    const auto& p = this->params_;
    project_out(p.get("c_re").ptr(), p.get("c_im").ptr(), p.get("d").ptr(), T(2), this->cfg_.d_model, state_width(),
                u, steps, x_re, x_im, y);
  }

  void backward_sequence(const Consts& c, std::span<const T> u, std::span<const T> dt, const CVec<T>& states,
                         std::span<const T> gy, GradBundle<T>& grads, std::span<T> du) const override {
    const std::size_t d = this->cfg_.d_model, P = state_width(), L = u.size() / d;
    const bool async = this->cfg_.async;
    const auto& p = this->params_;
    std::vector<T> gx_re(L * P), gx_im(L * P);
    project_out_backward(p.get("c_re").ptr(), p.get("c_im").ptr(), p.get("d").ptr(), T(2), d, P, u.data(), L,
                         states.re.data(), states.im.data(), gy.data(), gx_re.data(), gx_im.data(),
                         grads.get("c_re").ptr(), grads.get("c_im").ptr(), grads.get("d").ptr(), du.data());

    std::vector<T> w_re(L * P), w_im(L * P), a_re(async ? L * P : 0), a_im(async ? L * P : 0), b_re(L * P),
        b_im(L * P);
    project_in(p.get("b_re").ptr(), p.get("b_im").ptr(), P, d, u.data(), L, w_re.data(), w_im.data());
    transitions(c, u.data(), dt.data(), L, a_re.data(), a_im.data(), b_re.data(), b_im.data(), nullptr);
    ScanInput<T> in;
    in.length = L;
    in.width = P;
    in.time_invariant = !async;
    if (async) {
      in.a_re = a_re;
      in.a_im = a_im;
    } else {
      constant_a(c, in.a_re, in.a_im);
    }
    in.b_re = b_re;
    in.b_im = b_im;
    const auto sg = scan_backward<T>(in, states.re, states.im, gx_re, gx_im);

    const auto scheme = this->cfg_.scheme();
    std::vector<T> gw_re(L * P), gw_im(L * P);
    auto& dlre = grads.get("lambda_re_log");
    auto& dlim = grads.get("lambda_im");
    auto& dld = grads.get("log_delta");
    for (std::size_t j = 0; j < P; ++j) {
      const C a = pole(j);
      const T base = c[kDeltaBase][j];
      C g_a(0);
      T d_base = T(0);
      auto chain = [&](const TransitionJet<C>& jet, C g_abar, C g_gain, T& d_delta) {
        g_a += std::conj(jet.da_bar_da) * g_abar + std::conj(jet.dgain_da) * g_gain;
        d_delta += (std::conj(jet.da_bar_ddelta) * g_abar + std::conj(jet.dgain_ddelta) * g_gain).real();
      };
      if (!async) {
        const auto jet = transition_jet(scheme, a, base);
        C g_abar(0), g_gain(0);
        for (std::size_t k = 0; k < L; ++k) {
          const std::size_t i = k * P + j;
          const C g(sg.b.re[i], sg.b.im[i]);
          g_abar += C(sg.a.re[i], sg.a.im[i]);
          g_gain += std::conj(C(w_re[i], w_im[i])) * g;
          const C gw = std::conj(jet.gain) * g;
          gw_re[i] = gw.real();
          gw_im[i] = gw.imag();
        }
        chain(jet, g_abar, g_gain, d_base);
      } else {
        for (std::size_t k = 0; k < L; ++k) {
          const std::size_t i = k * P + j;
          const auto jet = transition_jet(scheme, a, base * dt[k]);
          const C g(sg.b.re[i], sg.b.im[i]);
          const C gw = std::conj(jet.gain) * g;
          gw_re[i] = gw.real();
          gw_im[i] = gw.imag();
          T d_delta = T(0);
          chain(jet, C(sg.a.re[i], sg.a.im[i]), std::conj(C(w_re[i], w_im[i])) * g, d_delta);
          d_base += d_delta * dt[k];
        }
      }
      dlre[j] += -std::exp(p.get("lambda_re_log")[j]) * g_a.real();
      dlim[j] += g_a.imag();
      dld[j] += base * d_base;
    }
    project_in_backward(p.get("b_re").ptr(), p.get("b_im").ptr(), P, d, u.data(), L, gw_re.data(), gw_im.data(),
                        grads.get("b_re").ptr(), grads.get("b_im").ptr(), du.data());
  }
};

}  // namespace

template <typename T>
std::unique_ptr<Layer<T>> make_s5(const LayerConfig& cfg, Rng& rng) {
  return std::make_unique<S5<T>>(cfg, rng);
}

template std::unique_ptr<Layer<float>> make_s5<float>(const LayerConfig&, Rng&);
template std::unique_ptr<Layer<double>> make_s5<double>(const LayerConfig&, Rng&);

}  // namespace linrec::detail
