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

#ifndef LAYERSPIN_KERNELS_HPP_
#define LAYERSPIN_KERNELS_HPP_

#include <cstddef>

// Raw row-major kernels used by the tensor and model layers.
//
// `kernels::` holds the OpenMP versions, `kernels::serial::` the plain loop
// references they are tested against. Every output element is accumulated
// in the same order by both, so results are bit-identical for any thread
// count.
namespace layerspin::kernels {

/// c[m x n] = a[m x k] * b[k x n]
void gemm(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
          std::size_t n);

/// out[r, :] = x[r, :] + bias, then relu (when `relu`) for each of `rows` rows.
void bias_act_rows(const double* x, const double* bias, double* out, std::size_t rows,
                   std::size_t cols, bool relu);
/// tanh variant of bias_act_rows.
void bias_tanh_rows(const double* x, const double* bias, double* out, std::size_t rows,
                    std::size_t cols);

/// out[j] = sum_r x[r, j], summed in row order.
void column_sums(const double* x, double* out, std::size_t rows, std::size_t cols);

/// Row-wise softmax cross-entropy. Writes probabilities to `probs` and the
/// per-row negative log-likelihood of `labels[r]` to `nll`.
void softmax_xent_rows(const double* logits, const int* labels, double* probs, double* nll,
                       std::size_t rows, std::size_t cols);

namespace serial {

void gemm(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
          std::size_t n);
void bias_act_rows(const double* x, const double* bias, double* out, std::size_t rows,
                   std::size_t cols, bool relu);
void bias_tanh_rows(const double* x, const double* bias, double* out, std::size_t rows,
                    std::size_t cols);
void column_sums(const double* x, double* out, std::size_t rows, std::size_t cols);
void softmax_xent_rows(const double* logits, const int* labels, double* probs, double* nll,
                       std::size_t rows, std::size_t cols);

}  // namespace serial
}  // namespace layerspin::kernels

#endif  // LAYERSPIN_KERNELS_HPP_
