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

// Reference kernels. Kept deliberately plain: these define the results the
// OpenMP kernels must reproduce bit for bit.

#include <algorithm>
#include <cmath>

#include "layerspin/kernels.hpp"

namespace layerspin::kernels::serial {

void gemm(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
          std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    std::fill(ci, ci + n, 0.0);
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      const double* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
}

void bias_act_rows(const double* x, const double* bias, double* out, std::size_t rows,
                   std::size_t cols, bool relu) {
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double v = x[r * cols + j] + bias[j];
      out[r * cols + j] = relu ? (v > 0.0 ? v : 0.0) : v;
    }
  }
}

void bias_tanh_rows(const double* x, const double* bias, double* out, std::size_t rows,
                    std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < cols; ++j) out[r * cols + j] = std::tanh(x[r * cols + j] + bias[j]);
}

void column_sums(const double* x, double* out, std::size_t rows, std::size_t cols) {
  std::fill(out, out + cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < cols; ++j) out[j] += x[r * cols + j];
}

void softmax_xent_rows(const double* logits, const int* labels, double* probs, double* nll,
                       std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* z = logits + r * cols;
    double* p = probs + r * cols;
    const double zmax = *std::max_element(z, z + cols);
    double sum = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      p[j] = std::exp(z[j] - zmax);
      sum += p[j];
    }
    for (std::size_t j = 0; j < cols; ++j) p[j] /= sum;
    if (labels != nullptr && nll != nullptr)
      nll[r] = std::log(sum) - (z[labels[r]] - zmax);
  }
}

}  // namespace layerspin::kernels::serial
