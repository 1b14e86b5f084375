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

// Shared projections of the MIMO diagonal layers (S5, LRU): a complex input
// map B [P, d_model] contracted with the input before the scan and a
// complex readout C [d_model, P] contracted after it.

#pragma once

#include <cstddef>

namespace linrec::detail {

/// w[k, p] = sum_h B[p, h] u[k, h]
template <typename T>
void project_in(const T* b_re, const T* b_im, std::size_t P, std::size_t D, const T* u, std::size_t steps, T* w_re,
                T* w_im) {
  for (std::size_t k = 0; k < steps; ++k) {
    const T* uk = u + k * D;
    for (std::size_t p = 0; p < P; ++p) {
      const T* br = b_re + p * D;
      const T* bi = b_im + p * D;
      T sr = T(0), si = T(0);
      for (std::size_t h = 0; h < D; ++h) {
        sr += br[h] * uk[h];
        si += bi[h] * uk[h];
      }
      w_re[k * P + p] = sr;
      w_im[k * P + p] = si;
    }
  }
}

/// y[k, h] = scale * Re(sum_p C[h, p] x[k, p]) + d[h] u[k, h]
template <typename T>
void project_out(const T* c_re, const T* c_im, const T* dvec, T scale, std::size_t D, std::size_t P, const T* u,
                 std::size_t steps, const T* x_re, const T* x_im, T* y) {
  for (std::size_t k = 0; k < steps; ++k) {
    const T* xr = x_re + k * P;
    const T* xi = x_im + k * P;
    for (std::size_t h = 0; h < D; ++h) {
      const T* cr = c_re + h * P;
      const T* ci = c_im + h * P;
      T s = T(0);
      for (std::size_t p = 0; p < P; ++p) s += cr[p] * xr[p] - ci[p] * xi[p];
      y[k * D + h] = scale * s + dvec[h] * u[k * D + h];
    }
  }
}

template <typename T>
void project_out_backward(const T* c_re, const T* c_im, const T* dvec, T scale, std::size_t D, std::size_t P,
                          const T* u, std::size_t steps, const T* x_re, const T* x_im, const T* gy, T* gx_re,
                          T* gx_im, T* dc_re, T* dc_im, T* dd, T* du) {
  for (std::size_t k = 0; k < steps; ++k) {
    const T* xr = x_re + k * P;
    const T* xi = x_im + k * P;
    T* gr = gx_re + k * P;
    T* gi = gx_im + k * P;
    for (std::size_t p = 0; p < P; ++p) gr[p] = gi[p] = T(0);
    for (std::size_t h = 0; h < D; ++h) {
      const T g = gy[k * D + h];
      dd[h] += g * u[k * D + h];
      du[k * D + h] += dvec[h] * g;
      const T sg = scale * g;
      const T* cr = c_re + h * P;
      const T* ci = c_im + h * P;
      T* dcr = dc_re + h * P;
      T* dci = dc_im + h * P;
      for (std::size_t p = 0; p < P; ++p) {
        gr[p] += cr[p] * sg;
        gi[p] -= ci[p] * sg;
        dcr[p] += xr[p] * sg;
        dci[p] -= xi[p] * sg;
      }
    }
  }
}

template <typename T>
void project_in_backward(const T* b_re, const T* b_im, std::size_t P, std::size_t D, const T* u, std::size_t steps,
                         const T* gw_re, const T* gw_im, T* db_re, T* db_im, T* du) {
  for (std::size_t k = 0; k < steps; ++k) {
    const T* uk = u + k * D;
    T* duk = du + k * D;
    for (std::size_t p = 0; p < P; ++p) {
      const T gr = gw_re[k * P + p], gi = gw_im[k * P + p];
      const T* br = b_re + p * D;
      const T* bi = b_im + p * D;
      T* dbr = db_re + p * D;
      T* dbi = db_im + p * D;
      for (std::size_t h = 0; h < D; ++h) {
        dbr[h] += gr * uk[h];
        dbi[h] += gi * uk[h];
        duk[h] += br[h] * gr + bi[h] * gi;
      }
    }
  }
}

}  // namespace linrec::detail
