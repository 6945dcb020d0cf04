/* Copyright 2026 The Layerspin Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// The OpenMP kernels must agree bit for bit with the serial reference, for
// any thread count.

#include <gtest/gtest.h>
#include <omp.h>

#include <cmath>
#include <tuple>
#include <vector>

#include "layerspin/kernels.hpp"
#include "layerspin/rng.hpp"

namespace layerspin {
namespace {

std::vector<double> random_values(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-2.0, 2.0);
  return v;
}

class ThreadCount : public ::testing::TestWithParam<int> {
 protected:
  void SetUp() override {
    saved_ = omp_get_max_threads();
    omp_set_num_threads(GetParam());
  }
  void TearDown() override { omp_set_num_threads(saved_); }

 private:
  int saved_ = 1;
};

TEST_P(ThreadCount, GemmMatchesSerialBitwise) {
  Rng rng(100 + GetParam());
  const std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> shapes{
      {1, 1, 1},   {3, 5, 2},     {7, 13, 17},   {128, 784, 784}, {128, 784, 10},
      {6, 300, 33}, {64, 257, 48}, {31, 1000, 70}, {0, 4, 4},       {5, 0, 3}};
  for (const auto& [m, k, n] : shapes) {
    const auto a = random_values(rng, m * k), b = random_values(rng, k * n);
    std::vector<double> c_par(m * n, 123.0), c_ser(m * n, -7.0);
    kernels::gemm(a.data(), b.data(), c_par.data(), m, k, n);
    kernels::serial::gemm(a.data(), b.data(), c_ser.data(), m, k, n);
    ASSERT_EQ(c_par, c_ser) << m << "x" << k << "x" << n;
  }
}

TEST_P(ThreadCount, RowKernelsMatchSerialBitwise) {
  Rng rng(200 + GetParam());
  for (const auto& [rows, cols] :
       std::vector<std::pair<std::size_t, std::size_t>>{{1, 1}, {3, 10}, {512, 784}, {300, 65}}) {
    const auto x = random_values(rng, rows * cols), bias = random_values(rng, cols);
    std::vector<double> p(rows * cols), s(rows * cols);
    for (bool relu : {false, true}) {
      kernels::bias_act_rows(x.data(), bias.data(), p.data(), rows, cols, relu);
      kernels::serial::bias_act_rows(x.data(), bias.data(), s.data(), rows, cols, relu);
      ASSERT_EQ(p, s);
    }
    kernels::bias_tanh_rows(x.data(), bias.data(), p.data(), rows, cols);
    kernels::serial::bias_tanh_rows(x.data(), bias.data(), s.data(), rows, cols);
    ASSERT_EQ(p, s);

    std::vector<double> cp(cols), cs(cols);
    kernels::column_sums(x.data(), cp.data(), rows, cols);
    kernels::serial::column_sums(x.data(), cs.data(), rows, cols);
    ASSERT_EQ(cp, cs);

    std::vector<int> labels(rows);
    for (int& l : labels) l = static_cast<int>(rng.below(cols));
    std::vector<double> nll_p(rows), nll_s(rows);
    kernels::softmax_xent_rows(x.data(), labels.data(), p.data(), nll_p.data(), rows, cols);
    kernels::serial::softmax_xent_rows(x.data(), labels.data(), s.data(), nll_s.data(), rows, cols);
    ASSERT_EQ(p, s);
    ASSERT_EQ(nll_p, nll_s);
  }
}

INSTANTIATE_TEST_SUITE_P(Threads, ThreadCount, ::testing::Values(1, 2, 4));

TEST(SerialKernels, GemmHandExample) {
  const double a[] = {1, 2, 3, 4}, b[] = {5, 6};
  double c[2];
  kernels::serial::gemm(a, b, c, 2, 2, 1);
  EXPECT_EQ(c[0], 17.0);
  EXPECT_EQ(c[1], 39.0);
}

TEST(SerialKernels, SoftmaxRowsSumToOneAndLossIsLogC) {
  const double logits[] = {0, 0, 0, 0, 1000, -1000, 3, 2};
  const int labels[] = {2, 0};
  double probs[8], nll[2];
  kernels::serial::softmax_xent_rows(logits, labels, probs, nll, 2, 4);
  EXPECT_NEAR(nll[0], std::log(4.0), 1e-15);
  EXPECT_EQ(nll[1], 0.0);  // stable for a huge margin
  for (int r = 0; r < 2; ++r) {
    double s = 0;
    for (int j = 0; j < 4; ++j) s += probs[r * 4 + j];
    EXPECT_NEAR(s, 1.0, 1e-15);
  }
}

TEST(SerialKernels, ReluAndBias) {
  const double x[] = {-1, 2, 0.5, -3}, bias[] = {0.5, -1};
  double out[4];
  kernels::serial::bias_act_rows(x, bias, out, 2, 2, true);
  EXPECT_EQ(out[0], 0.0);
  EXPECT_EQ(out[1], 1.0);
  EXPECT_EQ(out[2], 1.0);
  EXPECT_EQ(out[3], 0.0);
}

}  // namespace
}  // namespace layerspin
