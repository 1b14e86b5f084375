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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace linrec {

// Numeric values are part of the C ABI (see linrec.h); append only.
enum class ErrorCode : int {
  kShapeError = 1,
  kSingularBilinear = 2,
  kNonMonotoneTimestamps = 3,
  kUnknownLayer = 4,
  kTapeConsumed = 5,
  kUnknownMixer = 6,
  kUnsupported = 7,
  kTokenOutOfRange = 8,
  kBadMagic = 9,
  kCorruptHeader = 10,
  kShapeMismatch = 11,
  kConfigError = 12,
  kIoError = 13,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}
// Literal messages are only materialized on failure.
inline void require(bool cond, ErrorCode code, const char* what) {
  if (!cond) fail(code, what);
}

}  // namespace linrec
