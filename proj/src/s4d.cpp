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

// S4D: one independent complex diagonal SSM per channel (SISO). The d_model
// scans are fused into a single recurrence of width d_model * d_state.

#include <cmath>
#include <complex>
#include <numbers>

#include "layer_factories.hpp"
#include "linrec/autograd.hpp"

namespace linrec::detail {
namespace {

template <typename T>
class S4D final : public Layer<T> {
  using Base = Layer<T>;
  using typename Base::Consts;
  using C = std::complex<T>;
  // Consts slots.
  enum { kARe, kAIm, kBRe, kBIm, kDeltaBase, kNumConsts };

 public:
  S4D(const LayerConfig& cfg, Rng& rng) : Base(LayerKind::kS4D, cfg) {
    const std::size_t d = cfg.d_model, n = cfg.d_state;
    auto& p = this->params_;
    p.add("lambda_re_log", Tensor<T>(Shape{d, n}, static_cast<T>(std::log(0.5))));
    auto& lim = p.add("lambda_im", Tensor<T>(Shape{d, n}));
    for (std::size_t h = 0; h < d; ++h)
      for (std::size_t j = 0; j < n; ++j) lim(h, j) = static_cast<T>(std::numbers::pi * static_cast<double>(j));
    // Complex normals with unit total variance per entry, scaled by fan-in.
    for (const char* name : {"b_re", "b_im"}) rng.fill_normal(p.add(name, Tensor<T>(Shape{d, n})).data(), std::sqrt(0.5));
    const double c_scale = std::sqrt(0.5 / static_cast<double>(n));
    for (const char* name : {"c_re", "c_im"}) rng.fill_normal(p.add(name, Tensor<T>(Shape{d, n})).data(), c_scale);
    rng.fill_normal(p.add("d", Tensor<T>(Shape{d})).data());
    rng.fill_uniform(p.add("log_delta", Tensor<T>(Shape{d})).data(), std::log(1e-3), std::log(1e-1));
  }

  std::size_t state_width() const override { return this->cfg_.d_model * this->cfg_.d_state; }
  bool complex_state() const override { return true; }

 protected:
  bool invariant_a() const override { return !this->cfg_.async; }

  C pole(std::size_t w) const {
    const auto& p = this->params_;
    return C(-std::exp(p.get("lambda_re_log")[w]), p.get("lambda_im")[w]);
  }

  Consts prepare() const override {
    const std::size_t d = this->cfg_.d_model, n = this->cfg_.d_state, w = d * n;
    const auto& p = this->params_;
    const auto& b_re = p.get("b_re");
    const auto& b_im = p.get("b_im");
    const auto& log_delta = p.get("log_delta");
    Consts c(kNumConsts);
    for (int i = kARe; i <= kBIm; ++i) c[i].resize(w);
    c[kDeltaBase].resize(d);
    for (std::size_t h = 0; h < d; ++h) c[kDeltaBase][h] = std::exp(log_delta[h]);
    for (std::size_t i = 0; i < w; ++i) {
      const C a = pole(i), b(b_re[i], b_im[i]);
      if (this->cfg_.async) {
        // Continuous pole and input map; discretized per step.
        c[kARe][i] = a.real();
        c[kAIm][i] = a.imag();
        c[kBRe][i] = b.real();
        c[kBIm][i] = b.imag();
      } else {
        const auto t = discretize(this->cfg_.scheme(), a, b, c[kDeltaBase][i / n]);
        c[kARe][i] = t.a_bar.real();
        c[kAIm][i] = t.a_bar.imag();
        c[kBRe][i] = t.b_bar.real();
        c[kBIm][i] = t.b_bar.imag();
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
    const std::size_t d = this->cfg_.d_model, n = this->cfg_.d_state, w = d * n;
    const T* br = c[kBRe].data();
    const T* bi = c[kBIm].data();
    for (std::size_t k = 0; k < steps; ++k) {
      T* ob_re = b_re + k * w;
      T* ob_im = b_im + k * w;
      if (!this->cfg_.async) {
        for (std::size_t h = 0; h < d; ++h) {
          const T x = u[k * d + h];
          for (std::size_t j = h * n; j < (h + 1) * n; ++j) {
            ob_re[j] = br[j] * x;
            ob_im[j] = bi[j] * x;
          }
        }
        continue;
      }
      for (std::size_t h = 0; h < d; ++h) {
        const T delta = c[kDeltaBase][h] * dt[k];
        const T x = u[k * d + h];
        for (std::size_t j = h * n; j < (h + 1) * n; ++j) {
          const auto t = discretize(this->cfg_.scheme(), C(c[kARe][j], c[kAIm][j]), C(br[j], bi[j]), delta);
          a_re[k * w + j] = t.a_bar.real();
          a_im[k * w + j] = t.a_bar.imag();
          ob_re[j] = t.b_bar.real() * x;
          ob_im[j] = t.b_bar.imag() * x;
        }
      }
    }
  }

  void readout(const Consts&, const T* u, std::size_t steps, const T* x_re, const T* x_im, T* y,
               T*) const override {
    const std::size_t d = this->cfg_.d_model, n = this->cfg_.d_state, w = d * n;
    const auto& p = this->params_;
    const T* cr = p.get("c_re").ptr();
    const T* ci = p.get("c_im").ptr();
    const T* dd = p.get("d").ptr();
    for (std::size_t k = 0; k < steps; ++k) {
      const T* xr = x_re + k * w;
      const T* xi = x_im + k * w;
      for (std::size_t h = 0; h < d; ++h) {
        T s = T(0);
        for (std::size_t j = h * n; j < (h + 1) * n; ++j) s += cr[j] * xr[j] - ci[j] * xi[j];
        y[k * d + h] = s + dd[h] * u[k * d + h];
      }
    }
  }

  void backward_sequence(const Consts& c, std::span<const T> u, std::span<const T> dt, const CVec<T>& states,
                         std::span<const T> gy, GradBundle<T>& grads, std::span<T> du) const override {
    const std::size_t d = this->cfg_.d_model, n = this->cfg_.d_state, w = d * n;
    const std::size_t L = u.size() / d;
    const bool async = this->cfg_.async;
    const auto& p = this->params_;
    const auto& c_re = p.get("c_re");
    const auto& c_im = p.get("c_im");
    const auto& dvec = p.get("d");

    // Readout: y = Re(c x) + d u.
    std::vector<T> gx_re(L * w), gx_im(L * w);
    auto& dc_re = grads.get("c_re");
    auto& dc_im = grads.get("c_im");
    auto& dd = grads.get("d");
    for (std::size_t k = 0; k < L; ++k)
      for (std::size_t h = 0; h < d; ++h) {
        const T g = gy[k * d + h];
        dd[h] += g * u[k * d + h];
        du[k * d + h] += dvec[h] * g;
        for (std::size_t j = h * n; j < (h + 1) * n; ++j) {
          gx_re[k * w + j] = c_re[j] * g;
          gx_im[k * w + j] = -c_im[j] * g;
          dc_re[j] += states.re[k * w + j] * g;
          dc_im[j] -= states.im[k * w + j] * g;
        }
      }

    std::vector<T> a_re(async ? L * w : 0), a_im(async ? L * w : 0), b_re(L * w), b_im(L * w);
    transitions(c, u.data(), dt.data(), L, a_re.data(), a_im.data(), b_re.data(), b_im.data(), nullptr);
    ScanInput<T> in;
    in.length = L;
    in.width = w;
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

    auto& dlre = grads.get("lambda_re_log");
    auto& dlim = grads.get("lambda_im");
    auto& db_re = grads.get("b_re");
    auto& db_im = grads.get("b_im");
    auto& dld = grads.get("log_delta");
    const auto& b_param_re = p.get("b_re");
    const auto& b_param_im = p.get("b_im");
    const auto scheme = this->cfg_.scheme();

    for (std::size_t h = 0; h < d; ++h) {
      const T base = c[kDeltaBase][h];
      T d_base = T(0);
      for (std::size_t j = h * n; j < (h + 1) * n; ++j) {
        const C a = pole(j), B(b_param_re[j], b_param_im[j]);
        C g_a(0), g_B(0);
        auto chain = [&](const TransitionJet<C>& jet, C g_abar, C g_bbar, T& d_delta) {
          // b_bar = gain * B
          const C g_gain = std::conj(B) * g_bbar;
          g_B += std::conj(jet.gain) * g_bbar;
          g_a += std::conj(jet.da_bar_da) * g_abar + std::conj(jet.dgain_da) * g_gain;
          d_delta += (std::conj(jet.da_bar_ddelta) * g_abar + std::conj(jet.dgain_ddelta) * g_gain).real();
        };
        if (!async) {
          C g_abar(0), g_bbar(0);
          const C bbar(c[kBRe][j], c[kBIm][j]);
          for (std::size_t k = 0; k < L; ++k) {
            const C g(sg.b.re[k * w + j], sg.b.im[k * w + j]);
            g_abar += C(sg.a.re[k * w + j], sg.a.im[k * w + j]);
            g_bbar += u[k * d + h] * g;
            du[k * d + h] += (std::conj(bbar) * g).real();
          }
          T d_delta = T(0);
          chain(transition_jet(scheme, a, base), g_abar, g_bbar, d_delta);
          d_base += d_delta;
        } else {
          for (std::size_t k = 0; k < L; ++k) {
            const C g(sg.b.re[k * w + j], sg.b.im[k * w + j]);
            const auto jet = transition_jet(scheme, a, base * dt[k]);
            du[k * d + h] += (std::conj(jet.gain * B) * g).real();
            T d_delta = T(0);
            chain(jet, C(sg.a.re[k * w + j], sg.a.im[k * w + j]), u[k * d + h] * g, d_delta);
            d_base += d_delta * dt[k];
          }
        }
        dlre[j] += -std::exp(p.get("lambda_re_log")[j]) * g_a.real();
        dlim[j] += g_a.imag();
        db_re[j] += g_B.real();
        db_im[j] += g_B.imag();
      }
      dld[h] += base * d_base;
    }
  }
};

}  // namespace

template <typename T>
std::unique_ptr<Layer<T>> make_s4d(const LayerConfig& cfg, Rng& rng) {
  return std::make_unique<S4D<T>>(cfg, rng);
}

template std::unique_ptr<Layer<float>> make_s4d<float>(const LayerConfig&, Rng&);
template std::unique_ptr<Layer<double>> make_s4d<double>(const LayerConfig&, Rng&);

}  // namespace linrec::detail
