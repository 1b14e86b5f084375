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

// Small row-major dense kernels shared by the layers and the model.

#pragma once

#include <cstddef>

namespace linrec::detail {

/// y[m] = sum_n A[m, n] x[n]
template <typename T>
inline void matvec(const T* A, std::size_t m, std::size_t n, const T* x, T* y) {
  for (std::size_t i = 0; i < m; ++i) {
    const T* row = A + i * n;
    T s = T(0);
    for (std::size_t j = 0; j < n; ++j) s += row[j] * x[j];
    y[i] = s;
  }
}

/// y[n] += sum_m A[m, n] x[m]
template <typename T>
inline void matvec_t_acc(const T* A, std::size_t m, std::size_t n, const T* x, T* y) {
  for (std::size_t i = 0; i < m; ++i) {
    const T* row = A + i * n;
    const T xi = x[i];
    for (std::size_t j = 0; j < n; ++j) y[j] += row[j] * xi;
  }
}

/// G[m, n] += a[m] b[n]
template <typename T>
inline void outer_acc(T* G, std::size_t m, std::size_t n, const T* a, const T* b) {
  for (std::size_t i = 0; i < m; ++i) {
    T* row = G + i * n;
    const T ai = a[i];
    for (std::size_t j = 0; j < n; ++j) row[j] += ai * b[j];
  }
}

/// Y[r, m] = sum_n X[r, n] A[m, n] for r < rows (batched matvec).
template <typename T>
inline void matmul_nt(const T* X, std::size_t rows, const T* A, std::size_t m, std::size_t n, T* Y) {
  for (std::size_t r = 0; r < rows; ++r) matvec(A, m, n, X + r * n, Y + r * m);
}

}  // namespace linrec::detail
