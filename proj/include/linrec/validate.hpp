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


// Self-check suite: mode equivalence (sequential vs parallel vs step) over
// a sweep grid, and analytic vs finite-difference gradients, reported as a
// layer x discretization x check matrix.

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "linrec/layer.hpp"

namespace linrec {

struct ValidationCell {
  std::string layer;           // layer kind, or "lm" for the full model
  std::string discretization;  // "-" when not applicable; "+async" suffix for event-driven steps
  std::string check;           // parallel | step | gradient
  std::string dtype;
  double max_error = 0;
  double tolerance = 0;
  std::size_t cases = 0;
  bool passed = true;
};

struct ValidationOptions {
  /// Restrict to one layer kind; unset also runs the full-model gradient row.
  std::optional<LayerKind> layer;
  std::vector<std::size_t> lengths{1, 2, 257, 1024};
  std::vector<std::size_t> batches{1, 4};
  std::vector<std::size_t> d_models{1, 8};
  std::vector<std::size_t> d_states{2, 16};
  std::size_t workers = 4;
  std::size_t grad_seeds = 5;
  bool include_f32 = true;
};

struct ValidationReport {
  std::vector<ValidationCell> cells;

  bool passed() const;
  /// Fixed-width text matrix, one line per cell.
  std::string table() const;
};

inline constexpr double kEquivalenceTolF64 = 1e-10;
inline constexpr double kEquivalenceTolF32 = 1e-4;
inline constexpr double kGradientTol = 1e-5;

std::string format_cell(const ValidationCell& c);

ValidationReport run_validation(const ValidationOptions& opt = {},
                                const std::function<void(const ValidationCell&)>& on_cell = {});

}  // namespace linrec
