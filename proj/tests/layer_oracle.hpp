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

// Straight-line reference forwards for every layer kind, written from the
// layer formulas with std::complex and no shared code with the library
// kernels. f64 only; one sequence at a time.

#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

#include "linrec/layer.hpp"

namespace testsupport {

struct Disc {
  std::complex<double> a_bar, gain;
};

inline Disc reference_discretize(linrec::Discretization s, std::complex<double> a, double delta) {
  switch (s) {
    case linrec::Discretization::kZoh: {
      const auto e = std::exp(a * delta);
      return {e, std::abs(a) < 1e-8 ? std::complex<double>(delta) : (e - 1.0) / a};
    }
    case linrec::Discretization::kBilinear:
      return {(1.0 + a * delta / 2.0) / (1.0 - a * delta / 2.0), delta / (1.0 - a * delta / 2.0)};
    case linrec::Discretization::kDirac:
      return {std::exp(a * delta), 1.0};
  }
  throw std::logic_error("scheme");
}

inline double ref_sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double ref_softplus(double x) { return std::log1p(std::exp(x)); }

/// y [length, d_model] for u [length, d_model]; dt holds event intervals
/// for async layers.
inline std::vector<double> reference_layer(const linrec::Layer<double>& layer, std::span<const double> u,
                                           std::span<const double> dt = {}) {
  using cd = std::complex<double>;
  using linrec::LayerKind;
  const auto& cfg = layer.config();
  const auto& p = layer.params();
  const std::size_t d = cfg.d_model, n = cfg.d_state, L = u.size() / d;
  const auto P = [&](const char* name) { return p.get(name).data(); };
  std::vector<double> y(L * d, 0.0);
  const auto scheme = cfg.scheme();
  const auto step_dt = [&](std::size_t k) { return cfg.async ? dt[k] : 1.0; };

  switch (layer.kind()) {
    case LayerKind::kS4D: {
      std::vector<cd> x(d * n);
      for (std::size_t k = 0; k < L; ++k)
        for (std::size_t h = 0; h < d; ++h) {
          const double delta = std::exp(P("log_delta")[h]) * step_dt(k);
          const double uk = u[k * d + h];
          cd acc = 0;
          for (std::size_t j = 0; j < n; ++j) {
            const std::size_t i = h * n + j;
            const cd a(-std::exp(P("lambda_re_log")[i]), P("lambda_im")[i]);
            const auto t = reference_discretize(scheme, a, delta);
            x[i] = t.a_bar * x[i] + t.gain * cd(P("b_re")[i], P("b_im")[i]) * uk;
            acc += cd(P("c_re")[i], P("c_im")[i]) * x[i];
          }
          y[k * d + h] = acc.real() + P("d")[h] * uk;
        }
      break;
    }
    case LayerKind::kS5: {
      const std::size_t pairs = n / 2;
      std::vector<cd> x(pairs);
      for (std::size_t k = 0; k < L; ++k) {
        const double* uk = u.data() + k * d;
        for (std::size_t q = 0; q < pairs; ++q) {
          cd v = 0;
          for (std::size_t h = 0; h < d; ++h) v += cd(P("b_re")[q * d + h], P("b_im")[q * d + h]) * uk[h];
          const cd a(-std::exp(P("lambda_re_log")[q]), P("lambda_im")[q]);
          const auto t = reference_discretize(scheme, a, std::exp(P("log_delta")[q]) * step_dt(k));
          x[q] = t.a_bar * x[q] + t.gain * v;
        }
        for (std::size_t h = 0; h < d; ++h) {
          cd acc = 0;
          for (std::size_t q = 0; q < pairs; ++q) acc += cd(P("c_re")[h * pairs + q], P("c_im")[h * pairs + q]) * x[q];
          y[k * d + h] = 2.0 * acc.real() + P("d")[h] * uk[h];
        }
      }
      break;
    }
    case LayerKind::kLRU: {
      std::vector<cd> x(n);
      for (std::size_t k = 0; k < L; ++k) {
        const double* uk = u.data() + k * d;
        for (std::size_t j = 0; j < n; ++j) {
          const cd lambda = std::exp(cd(-std::exp(P("nu_log")[j]), std::exp(P("theta_log")[j])));
          cd v = 0;
          for (std::size_t h = 0; h < d; ++h) v += cd(P("b_re")[j * d + h], P("b_im")[j * d + h]) * uk[h];
          x[j] = lambda * x[j] + std::exp(P("gamma_log")[j]) * v;
        }
        for (std::size_t h = 0; h < d; ++h) {
          cd acc = 0;
          for (std::size_t j = 0; j < n; ++j) acc += cd(P("c_re")[h * n + j], P("c_im")[h * n + j]) * x[j];
          y[k * d + h] = acc.real() + P("d")[h] * uk[h];
        }
      }
      break;
    }
    case LayerKind::kS6: {
      const std::size_t r = cfg.d_rank;
      std::vector<double> x(d * n, 0.0);
      for (std::size_t k = 0; k < L; ++k) {
        const double* uk = u.data() + k * d;
        std::vector<double> z(r, 0.0), Bk(n, 0.0), Ck(n, 0.0);
        for (std::size_t q = 0; q < r; ++q)
          for (std::size_t h = 0; h < d; ++h) z[q] += P("w_delta_down")[q * d + h] * uk[h];
        for (std::size_t j = 0; j < n; ++j)
          for (std::size_t h = 0; h < d; ++h) {
            Bk[j] += P("w_b")[j * d + h] * uk[h];
            Ck[j] += P("w_c")[j * d + h] * uk[h];
          }
        for (std::size_t h = 0; h < d; ++h) {
          double s = P("b_delta")[h];
          for (std::size_t q = 0; q < r; ++q) s += P("w_delta")[h * r + q] * z[q];
          const double delta = ref_softplus(s);
          double acc = 0;
          for (std::size_t j = 0; j < n; ++j) {
            const double a = -std::exp(P("a_log")[h * n + j]);
            const double a_bar = scheme == linrec::Discretization::kBilinear
                                     ? (1 + a * delta / 2) / (1 - a * delta / 2)
                                     : std::exp(a * delta);
            const double gain = scheme == linrec::Discretization::kZoh        ? delta
                                : scheme == linrec::Discretization::kDirac    ? 1.0
                                                                              : delta / (1 - a * delta / 2);
            double& xi = x[h * n + j];
            xi = a_bar * xi + gain * Bk[j] * uk[h];
            acc += Ck[j] * xi;
          }
          y[k * d + h] = acc + P("d")[h] * uk[h];
        }
      }
      break;
    }
    case LayerKind::kRGLRU: {
      const double c = 8.0;
      std::vector<double> x(n, 0.0);
      for (std::size_t k = 0; k < L; ++k) {
        const double* uk = u.data() + k * d;
        for (std::size_t j = 0; j < n; ++j) {
          double qr = P("b_r")[j], qi = P("b_i")[j], v = 0;
          for (std::size_t h = 0; h < d; ++h) {
            qr += P("w_r")[j * d + h] * uk[h];
            qi += P("w_i")[j * d + h] * uk[h];
            v += P("w_in")[j * d + h] * uk[h];
          }
          const double base = ref_sigmoid(P("lambda")[j]);
          const double ak = std::pow(base, c * ref_sigmoid(qr));
          x[j] = ak * x[j] + std::sqrt(1 - ak * ak) * ref_sigmoid(qi) * v;
        }
        for (std::size_t h = 0; h < d; ++h) {
          double acc = 0;
          for (std::size_t j = 0; j < n; ++j) acc += P("w_out")[h * n + j] * x[j];
          y[k * d + h] = acc;
        }
      }
      break;
    }
  }
  return y;
}

}  // namespace testsupport
