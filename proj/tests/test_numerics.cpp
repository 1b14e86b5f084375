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

#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "linrec/numerics.hpp"
#include "support.hpp"

using namespace linrec;

TEST_SUITE("numerics") {
  TEST_CASE("tensor extents") {
    Tensor<double> t(Shape{2, 3, 4});
    CHECK(t.size() == 24);
    CHECK(t.strides() == Shape{12, 4, 1});
    t(1, 2, 3) = 5.0;
    CHECK(t[23] == 5.0);
    CHECK_THROWS_AS(Tensor<float>(Shape{2, 2}, std::vector<float>(3)), Error);
    try {
      Tensor<float>(Shape{2, 2}, std::vector<float>(5));
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kShapeError);
    }
  }

  TEST_CASE("complex_exp examples") {
    auto z = complex_exp(0.0, 0.0);
    CHECK(z.real() == 1.0);
    CHECK(z.imag() == 0.0);
    z = complex_exp(0.0, std::numbers::pi);
    CHECK(z.real() == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(std::abs(z.imag()) < 1e-15);
    z = complex_exp(-1.0, 0.0);
    CHECK(std::abs(z.real() - 0.36787944) < 1e-8);
  }

  TEST_CASE("complex_exp product law") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(-5.0 / std::sqrt(2.0), 5.0 / std::sqrt(2.0));
    for (int i = 0; i < 1000; ++i) {
      const std::complex<double> a(u(gen), u(gen)), b(u(gen), u(gen));
      const auto lhs = complex_exp(a + b);
      const auto rhs = complex_exp(a) * complex_exp(b);
      CHECK(std::abs(lhs - rhs) <= 1e-10 * std::abs(rhs));
    }
  }

  TEST_CASE("softplus and sigmoid") {
    CHECK(sigmoid(0.0) == 0.5);
    CHECK(std::abs(softplus(0.0) - std::log(2.0)) < 1e-8);
    CHECK(std::abs(softplus(40.0) - 40.0) < 1e-12);
    CHECK(std::abs(softplus(40.0f) - 40.0f) < 1e-6f);
    CHECK(softplus(1000.0) == 1000.0);
    CHECK(softplus_threshold<float>() == 30.0f);
    CHECK(softplus_threshold<double>() == 50.0);
    for (double x = -60; x <= 60; x += 0.37) CHECK(std::abs(sigmoid(x) + sigmoid(-x) - 1.0) <= 1e-12);
  }

  TEST_CASE("rng streams do not depend on threads") {
    std::vector<double> one(10007), two(10007), many(10007);
    Rng(42).fill_normal<double>(one, 1.0, 1);
    Rng(42).fill_normal<double>(two, 1.0, 2);
    Rng(42).fill_normal<double>(many, 1.0, 7);
    CHECK(one == two);
    CHECK(one == many);
    std::vector<float> fu1(4099), fu4(4099);
    Rng(3).fill_uniform<float>(fu1, -1, 1, 1);
    Rng(3).fill_uniform<float>(fu4, -1, 1, 4);
    CHECK(fu1 == fu4);
  }

  TEST_CASE("rng moments") {
    Rng r(1);
    double s = 0, s2 = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const double x = r.normal();
      s += x;
      s2 += x * x;
    }
    CHECK(std::abs(s / n) < 0.01);
    CHECK(std::abs(s2 / n - 1.0) < 0.02);
    CHECK(Rng(5).uniform() == Rng(5).uniform());
    CHECK(Rng(5).split(1).uniform() != Rng(5).split(2).uniform());
  }

  TEST_CASE("dtype names") {
    CHECK(parse_dtype("f32") == DType::kF32);
    CHECK(parse_dtype("f64") == DType::kF64);
    CHECK(dtype_size(DType::kF64) == 8);
    CHECK_THROWS_AS(parse_dtype("f16"), Error);
  }
}
