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

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "layerspin/kernels.hpp"

namespace layerspin::kernels {
namespace {

// Register tile: kRowTile rows of A against kColTile packed columns of B.
#if defined(__AVX512F__)
constexpr std::size_t kColTile = 16;
#else
constexpr std::size_t kColTile = 8;
#endif
constexpr std::size_t kRowTile = 6;
constexpr std::size_t kVecWidth = 8;
constexpr std::size_t kVecsPerTile = kColTile / kVecWidth;

typedef double vec8 __attribute__((vector_size(kVecWidth * sizeof(double))));
// Same vector with element alignment, for loads and stores into plain arrays.
typedef double vec8u __attribute__((vector_size(kVecWidth * sizeof(double)), aligned(8), may_alias));

// Below this many multiply-adds a parallel region costs more than it saves.
constexpr std::size_t kParallelWork = 1 << 15;

// Depth of one packed B block; a kDepth x kColTile panel stays in L1.
constexpr std::size_t kDepth = 256;

// Accumulates over p in increasing order. The first depth block starts from
// zero and later blocks resume from c, so every c element sees the same
// sequence of additions as the serial reference and matches it exactly.
template <std::size_t Rows>
void micro_tile(const double* a, std::size_t lda, const double* packed, double* c,
                std::size_t ldc, std::size_t k, bool resume) {
  vec8 acc[Rows][kVecsPerTile];
  for (std::size_t r = 0; r < Rows; ++r)
    for (std::size_t v = 0; v < kVecsPerTile; ++v)
      acc[r][v] = resume ? *reinterpret_cast<const vec8u*>(c + r * ldc + v * kVecWidth) : vec8{};
  for (std::size_t p = 0; p < k; ++p) {
    const vec8u* bp = reinterpret_cast<const vec8u*>(packed + p * kColTile);
    for (std::size_t r = 0; r < Rows; ++r) {
      const double arp = a[r * lda + p];
      for (std::size_t v = 0; v < kVecsPerTile; ++v) acc[r][v] += arp * bp[v];
    }
  }
  for (std::size_t r = 0; r < Rows; ++r)
    for (std::size_t v = 0; v < kVecsPerTile; ++v)
      *reinterpret_cast<vec8u*>(c + r * ldc + v * kVecWidth) = acc[r][v];
}

void dispatch_tile(std::size_t rows, const double* a, std::size_t lda, const double* packed,
                   double* c, std::size_t ldc, std::size_t k, bool resume) {
  switch (rows) {
    case 6: micro_tile<6>(a, lda, packed, c, ldc, k, resume); break;
    case 5: micro_tile<5>(a, lda, packed, c, ldc, k, resume); break;
    case 4: micro_tile<4>(a, lda, packed, c, ldc, k, resume); break;
    case 3: micro_tile<3>(a, lda, packed, c, ldc, k, resume); break;
    case 2: micro_tile<2>(a, lda, packed, c, ldc, k, resume); break;
    default: micro_tile<1>(a, lda, packed, c, ldc, k, resume); break;
  }
}

std::vector<double>& pack_buffer() {
  thread_local std::vector<double> buf;
  return buf;
}

}  // namespace

void gemm(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
          std::size_t n) {
  const bool par = m * k * n >= kParallelWork;
  const std::size_t panels = n / kColTile;
  const std::size_t tail = panels * kColTile;
  const std::size_t row_blocks = (m + kRowTile - 1) / kRowTile;
  if (k == 0) {
    std::fill(c, c + m * n, 0.0);
    return;
  }

  // B is repacked panel-major, one depth block at a time, so the micro tile
  // streams it contiguously.
  std::vector<double>& packed = pack_buffer();
  packed.resize(panels * std::min(k, kDepth) * kColTile);
  double* pk = packed.data();
  for (std::size_t p0 = 0; p0 < k; p0 += kDepth) {
    const std::size_t kc = std::min(kDepth, k - p0);
#pragma omp parallel for schedule(static) if (par)
    for (std::size_t q = 0; q < panels; ++q)
      for (std::size_t p = 0; p < kc; ++p)
        std::memcpy(pk + (q * kc + p) * kColTile, b + (p0 + p) * n + q * kColTile,
                    kColTile * sizeof(double));

#pragma omp parallel for schedule(static) if (par)
    for (std::size_t q = 0; q < panels; ++q)
      for (std::size_t blk = 0; blk < row_blocks; ++blk) {
        const std::size_t i0 = blk * kRowTile;
        dispatch_tile(std::min(kRowTile, m - i0), a + i0 * k + p0, k, pk + q * kc * kColTile,
                      c + i0 * n + q * kColTile, n, kc, p0 > 0);
      }
  }

  if (tail == n) return;
#pragma omp parallel for schedule(static) if (par)
  for (std::size_t i = 0; i < m; ++i) {
    // fewer than kColTile columns; walk B by rows, same p order per element
    double acc[kColTile] = {};
    const std::size_t w = n - tail;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      const double* br = b + p * n + tail;
      for (std::size_t j = 0; j < w; ++j) acc[j] += av * br[j];
    }
    for (std::size_t j = 0; j < w; ++j) c[i * n + tail + j] = acc[j];
  }
}

void bias_act_rows(const double* x, const double* bias, double* out, std::size_t rows,
                   std::size_t cols, bool relu) {
#pragma omp parallel for schedule(static) if (rows * cols >= kParallelWork)
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x + r * cols;
    double* o = out + r * cols;
    if (relu) {
      for (std::size_t j = 0; j < cols; ++j) {
        const double v = xr[j] + bias[j];
        o[j] = v > 0.0 ? v : 0.0;
      }
    } else {
      for (std::size_t j = 0; j < cols; ++j) o[j] = xr[j] + bias[j];
    }
  }
}

void bias_tanh_rows(const double* x, const double* bias, double* out, std::size_t rows,
                    std::size_t cols) {
#pragma omp parallel for schedule(static) if (rows * cols >= kParallelWork)
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < cols; ++j) out[r * cols + j] = std::tanh(x[r * cols + j] + bias[j]);
}

void column_sums(const double* x, double* out, std::size_t rows, std::size_t cols) {
  // Parallel over columns; each column is still summed top to bottom.
  constexpr std::size_t kStrip = 64;
  const std::size_t strips = (cols + kStrip - 1) / kStrip;
#pragma omp parallel for schedule(static) if (rows * cols >= kParallelWork)
  for (std::size_t s = 0; s < strips; ++s) {
    const std::size_t j0 = s * kStrip;
    const std::size_t j1 = std::min(cols, j0 + kStrip);
    std::fill(out + j0, out + j1, 0.0);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t j = j0; j < j1; ++j) out[j] += x[r * cols + j];
  }
}

void softmax_xent_rows(const double* logits, const int* labels, double* probs, double* nll,
                       std::size_t rows, std::size_t cols) {
#pragma omp parallel for schedule(static) if (rows * cols >= kParallelWork)
  for (std::size_t r = 0; r < rows; ++r)
    serial::softmax_xent_rows(logits + r * cols, labels ? labels + r : nullptr, probs + r * cols,
                              nll ? nll + r : nullptr, 1, cols);
}

}  // namespace layerspin::kernels
