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

// Shared helpers for the test binaries. Reference values come from plain
// std::complex loops written here, never from the library under test.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "linrec/numerics.hpp"

// Checks that `expr` throws linrec::Error with the given code.
#define CHECK_ERROR_CODE(expr, expected)                     \
  do {                                                       \
    bool thrown_ = false;                                    \
    try {                                                    \
      (void)(expr);                                          \
    } catch (const linrec::Error& e_) {                      \
      thrown_ = true;                                        \
      CHECK_MESSAGE(e_.code() == (expected), e_.what());     \
    }                                                        \
    CHECK_MESSAGE(thrown_, "no linrec::Error from " #expr);  \
  } while (0)

namespace testsupport {

using cd = std::complex<double>;

/// x_k = a_k x_{k-1} + b_k, one lane.
inline std::vector<cd> naive_scan(const std::vector<cd>& a, const std::vector<cd>& b, cd x0 = 0) {
  std::vector<cd> out(a.size());
  cd x = x0;
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = x = a[k] * x + b[k];
  return out;
}

/// max |a - b| / max |b|.
template <typename T>
double rel_err(std::span<const T> a, std::span<const T> b) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    num = std::max(num, std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
    den = std::max(den, std::abs(static_cast<double>(b[i])));
  }
  return den > 0 ? num / den : num;
}

template <typename T>
double rel_err(const linrec::Tensor<T>& a, const linrec::Tensor<T>& b) {
  return rel_err<T>(a.data(), b.data());
}

/// Standard normal tensor from std::mt19937_64.
template <typename T>
linrec::Tensor<T> randn(linrec::Shape shape, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd(0.0, scale);
  linrec::Tensor<T> t(std::move(shape));
  for (auto& v : t.data()) v = static_cast<T>(nd(gen));
  return t;
}

/// Central difference of `loss` with respect to the scalar `p`.
template <typename T, typename F>
double central_diff(F&& loss, T& p, double h) {
  const T saved = p;
  p = static_cast<T>(saved + h);
  const double up = loss();
  p = static_cast<T>(saved - h);
  const double down = loss();
  p = saved;
  return (up - down) / (2 * h);
}

/// sum(w * y)
template <typename T>
double dot(const linrec::Tensor<T>& w, const linrec::Tensor<T>& y) {
  double s = 0;
  for (std::size_t i = 0; i < y.size(); ++i) s += static_cast<double>(w[i]) * static_cast<double>(y[i]);
  return s;
}

}  // namespace testsupport
