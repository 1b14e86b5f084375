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

#include "linrec/discretize.hpp"

#include <string>

namespace linrec {

std::string_view discretization_name(Discretization d) {
  switch (d) {
    case Discretization::kZoh: return "zoh";
    case Discretization::kBilinear: return "bilinear";
    case Discretization::kDirac: return "dirac";
  }
  return "zoh";
}

Discretization parse_discretization(std::string_view name) {
  if (name == "zoh") return Discretization::kZoh;
  if (name == "bilinear" || name == "tustin") return Discretization::kBilinear;
  if (name == "dirac") return Discretization::kDirac;
  fail(ErrorCode::kConfigError, "unknown discretization '" + std::string(name) + "'");
}

template <typename T>
std::vector<T> deltas_from_timestamps(std::span<const T> t, T delta0) {
  std::vector<T> out(t.size());
  if (t.empty()) return out;
  out[0] = delta0;
  for (std::size_t k = 1; k < t.size(); ++k) {
    if (t[k] < t[k - 1])
      fail(ErrorCode::kNonMonotoneTimestamps, "t[" + std::to_string(k) + "] = " + std::to_string(t[k]) +
                                                   " precedes t[" + std::to_string(k - 1) +
                                                   "] = " + std::to_string(t[k - 1]));
    out[k] = t[k] - t[k - 1];
  }
  return out;
}

template std::vector<float> deltas_from_timestamps<float>(std::span<const float>, float);
template std::vector<double> deltas_from_timestamps<double>(std::span<const double>, double);

}  // namespace linrec
