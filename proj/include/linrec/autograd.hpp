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

// Reverse-mode gradients of the scan, and the central-difference oracle
// every analytic gradient in the library is checked against.
//
// Convention: for a complex quantity z = x + iy feeding a real loss L, its
// gradient is reported as dL/dx + i dL/dy. Under that convention a product
// w = u*v back-propagates as G_u = conj(v) G_w, and parameters stored as
// real planes read their gradients directly off the two components.

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>

#include "linrec/layer.hpp"
#include "linrec/numerics.hpp"
#include "linrec/scan.hpp"

namespace linrec {

template <typename T>
struct ScanGrads {
  CVec<T> a;   // per step, [length, width]
  CVec<T> b;   // [length, width]
  CVec<T> x0;  // [width]
};

/// g_k = G_k + conj(a_{k+1}) g_{k+1}, grad_b[k] = g_k,
/// grad_a[k] = g_k conj(x_{k-1}) with x_{-1} = x0, grad_x0 = conj(a_0) g_0.
template <typename T>
ScanGrads<T> scan_backward(const ScanInput<T>& in, std::span<const T> states_re, std::span<const T> states_im,
                           std::span<const T> grad_re, std::span<const T> grad_im);

/// Owns the inputs and states of one scan so it can be differentiated once.
template <typename T>
class ScanTape {
 public:
  ScanTape(const ScanInput<T>& in, ExecMode mode = ExecMode::kSequential, std::size_t workers = 1);

  const CVec<T>& states() const noexcept { return states_; }
  const ScanInput<T>& input() const noexcept { return in_; }
  bool consumed() const noexcept { return consumed_; }

  /// Throws TapeConsumed when called a second time.
  ScanGrads<T> backward(std::span<const T> grad_re, std::span<const T> grad_im);

 private:
  std::vector<T> a_re_, a_im_, b_re_, b_im_, x0_re_, x0_im_;
  ScanInput<T> in_;
  CVec<T> states_;
  bool consumed_ = false;
};

struct FiniteDiffReport {
  bool passed = false;
  double max_error = 0;   // max |analytic - numeric| / max(|numeric|, abs_tol / tol)
  std::string worst_path;  // "name[flat index]"
  double worst_analytic = 0;
  double worst_numeric = 0;
  std::size_t checked = 0;
};

struct FiniteDiffOptions {
  double h = 1e-5;
  double tol = 1e-5;
  double abs_tol = 1e-8;
};

/// Central differences (L(p+h) - L(p-h)) / 2h over every scalar of
/// `params`, compared with `analytic`. `objective` must read the current
/// values of `params`, which are perturbed in place and restored.
template <typename T>
FiniteDiffReport finite_diff_check(const std::function<double()>& objective, NamedTensors<T>& params,
                                   const NamedTensors<T>& analytic, const FiniteDiffOptions& opt = {});

/// Same over parameters owned by several containers (e.g. a whole model).
template <typename T>
FiniteDiffReport finite_diff_check(const std::function<double()>& objective, std::span<const ParamRef<T>> params,
                                   const NamedTensors<T>& analytic, const FiniteDiffOptions& opt = {});

/// Same, with the objective split into a forward pass and a loss on its
/// output.
template <typename T, typename Out>
FiniteDiffReport finite_diff_check(const std::function<Out()>& forward, NamedTensors<T>& params,
                                   const std::function<double(const Out&)>& loss, const NamedTensors<T>& analytic,
                                   const FiniteDiffOptions& opt = {}) {
  return finite_diff_check<T>([&] { return loss(forward()); }, params, analytic, opt);
}

/// Free-function spelling of Layer::backward.
template <typename T>
LayerGrads<T> layer_backward(const Layer<T>& layer, Tape<T>& tape, const Tensor<T>& grad_y) {
  return layer.backward(tape, grad_y);
}

}  // namespace linrec
