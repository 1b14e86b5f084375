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

#include "linrec/autograd.hpp"

#include <algorithm>
#include <cmath>

namespace linrec {

template <typename T>
ScanGrads<T> scan_backward(const ScanInput<T>& in, std::span<const T> states_re, std::span<const T> states_im,
                           std::span<const T> grad_re, std::span<const T> grad_im) {
  in.validate();
  const std::size_t L = in.length, w = in.width, n = L * w;
  const bool cplx = in.is_complex();
  require(states_re.size() == n && grad_re.size() == n && (!cplx || (states_im.size() == n && grad_im.size() == n)),
          ErrorCode::kShapeError, "scan_backward: states/gradient extents");
  ScanGrads<T> g{CVec<T>(n, cplx), CVec<T>(n, cplx), CVec<T>(w, cplx)};
  if (L == 0) return g;

  auto a_row = [&](std::size_t k) { return in.time_invariant ? std::size_t{0} : k * w; };
  // Adjoint of the state, swept backwards.
  std::vector<T> gr(w, T(0)), gi(cplx ? w : 0, T(0));
  for (std::size_t k = L; k-- > 0;) {
    const std::size_t row = k * w;
    if (k + 1 < L) {
      const std::size_t ar = a_row(k + 1);
      for (std::size_t j = 0; j < w; ++j) {
        const T a_r = in.a_re[ar + j];
        if (cplx) {
          const T a_i = in.a_im[ar + j];
          const T r = a_r * gr[j] + a_i * gi[j];  // conj(a) * g
          const T i = a_r * gi[j] - a_i * gr[j];
          gr[j] = r;
          gi[j] = i;
        } else {
          gr[j] *= a_r;
        }
      }
    } else {
      std::fill(gr.begin(), gr.end(), T(0));
      std::fill(gi.begin(), gi.end(), T(0));
    }
    for (std::size_t j = 0; j < w; ++j) {
      gr[j] += grad_re[row + j];
      if (cplx) gi[j] += grad_im[row + j];
      g.b.re[row + j] = gr[j];
      if (cplx) g.b.im[row + j] = gi[j];
      // x_{k-1}
      T xr = T(0), xi = T(0);
      if (k > 0) {
        xr = states_re[row - w + j];
        if (cplx) xi = states_im[row - w + j];
      } else {
        if (!in.x0_re.empty()) xr = in.x0_re[j];
        if (cplx && !in.x0_im.empty()) xi = in.x0_im[j];
      }
      if (cplx) {
        g.a.re[row + j] = gr[j] * xr + gi[j] * xi;  // g * conj(x)
        g.a.im[row + j] = gi[j] * xr - gr[j] * xi;
      } else {
        g.a.re[row + j] = gr[j] * xr;
      }
    }
  }
  const std::size_t a0 = a_row(0);
  for (std::size_t j = 0; j < w; ++j) {
    const T a_r = in.a_re[a0 + j];
    if (cplx) {
      const T a_i = in.a_im[a0 + j];
      g.x0.re[j] = a_r * gr[j] + a_i * gi[j];
      g.x0.im[j] = a_r * gi[j] - a_i * gr[j];
    } else {
      g.x0.re[j] = a_r * gr[j];
    }
  }
  return g;
}

template <typename T>
ScanTape<T>::ScanTape(const ScanInput<T>& in, ExecMode mode, std::size_t workers)
    : a_re_(in.a_re.begin(), in.a_re.end()),
      a_im_(in.a_im.begin(), in.a_im.end()),
      b_re_(in.b_re.begin(), in.b_re.end()),
      b_im_(in.b_im.begin(), in.b_im.end()),
      x0_re_(in.x0_re.begin(), in.x0_re.end()),
      x0_im_(in.x0_im.begin(), in.x0_im.end()) {
  in_ = in;
  in_.a_re = a_re_;
  in_.a_im = a_im_;
  in_.b_re = b_re_;
  in_.b_im = b_im_;
  in_.x0_re = x0_re_;
  in_.x0_im = x0_im_;
  const std::size_t n = in.length * in.width;
  states_ = CVec<T>(n, in.is_complex());
  ScanOutput<T> out{states_.re, in.is_complex() ? std::span<T>(states_.im) : std::span<T>{}};
  if (mode == ExecMode::kParallel)
    scan_parallel(in_, out, workers);
  else
    scan_sequential(in_, out);
}

template <typename T>
ScanGrads<T> ScanTape<T>::backward(std::span<const T> grad_re, std::span<const T> grad_im) {
  require(!consumed_, ErrorCode::kTapeConsumed, "scan tape already differentiated");
  consumed_ = true;
  return scan_backward<T>(in_, states_.re, states_.im, grad_re, grad_im);
}

template <typename T>
FiniteDiffReport finite_diff_check(const std::function<double()>& objective, NamedTensors<T>& params,
                                   const NamedTensors<T>& analytic, const FiniteDiffOptions& opt) {
  std::vector<ParamRef<T>> refs;
  for (auto& [name, t] : params) refs.push_back({name, &t});
  return finite_diff_check<T>(objective, std::span<const ParamRef<T>>(refs), analytic, opt);
}

template <typename T>
FiniteDiffReport finite_diff_check(const std::function<double()>& objective, std::span<const ParamRef<T>> params,
                                   const NamedTensors<T>& analytic, const FiniteDiffOptions& opt) {
  FiniteDiffReport r;
  const double floor = opt.abs_tol / opt.tol;
  r.max_error = 0;
  for (const auto& ref : params) {
    const std::string& name = ref.path;
    Tensor<T>& tensor = *ref.tensor;
    const Tensor<T>* an = analytic.find(name);
    require(an != nullptr && an->shape() == tensor.shape(), ErrorCode::kShapeMismatch,
            "finite_diff_check: no analytic gradient matching '" + name + "'");
    for (std::size_t i = 0; i < tensor.size(); ++i) {
      const T saved = tensor[i];
      tensor[i] = static_cast<T>(saved + opt.h);
      const double up = objective();
      tensor[i] = static_cast<T>(saved - opt.h);
      const double down = objective();
      tensor[i] = saved;
      const double numeric = (up - down) / (2 * opt.h);
      const double analytic_v = static_cast<double>((*an)[i]);
      const double err = std::abs(analytic_v - numeric) / std::max(std::abs(numeric), floor);
      ++r.checked;
      if (!(err <= r.max_error)) {
        r.max_error = err;
        r.worst_path = name + "[" + std::to_string(i) + "]";
        r.worst_analytic = analytic_v;
        r.worst_numeric = numeric;
      }
    }
  }
  r.passed = r.max_error <= opt.tol;
  return r;
}

template ScanGrads<float> scan_backward<float>(const ScanInput<float>&, std::span<const float>,
                                               std::span<const float>, std::span<const float>,
                                               std::span<const float>);
template ScanGrads<double> scan_backward<double>(const ScanInput<double>&, std::span<const double>,
                                                 std::span<const double>, std::span<const double>,
                                                 std::span<const double>);
template class ScanTape<float>;
template class ScanTape<double>;
template FiniteDiffReport finite_diff_check<float>(const std::function<double()>&, NamedTensors<float>&,
                                                   const NamedTensors<float>&, const FiniteDiffOptions&);
template FiniteDiffReport finite_diff_check<double>(const std::function<double()>&, NamedTensors<double>&,
                                                    const NamedTensors<double>&, const FiniteDiffOptions&);
template FiniteDiffReport finite_diff_check<float>(const std::function<double()>&, std::span<const ParamRef<float>>,
                                                   const NamedTensors<float>&, const FiniteDiffOptions&);
template FiniteDiffReport finite_diff_check<double>(const std::function<double()>&,
                                                    std::span<const ParamRef<double>>, const NamedTensors<double>&,
                                                    const FiniteDiffOptions&);

}  // namespace linrec
