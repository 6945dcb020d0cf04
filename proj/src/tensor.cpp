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

#include "layerspin/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

#include "layerspin/kernels.hpp"

namespace layerspin {
namespace {

std::size_t element_count(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

void require_rank2(const Dense& t, const char* what) {
  if (t.rank() != 2)
    throw std::invalid_argument(std::string(what) + ": expected a matrix, got shape " +
                                to_string(t.shape()));
}

}  // namespace

std::string to_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Dense::Dense(Shape shape) : shape_(std::move(shape)), data_(element_count(shape_), 0.0) {}

Dense::Dense(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (element_count(shape_) != data_.size())
    throw std::invalid_argument("Dense: shape " + to_string(shape_) + " does not hold " +
                                std::to_string(data_.size()) + " values");
}

Dense Dense::identity(std::size_t n) {
  Dense t({n, n});
  for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

Dense Dense::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw std::invalid_argument("Dense::from_rows: ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Dense({r, c}, std::move(data));
}

Dense Dense::vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Dense({n}, std::move(values));
}

std::size_t Dense::rows() const {
  require_rank2(*this, "rows()");
  return shape_[0];
}

std::size_t Dense::cols() const {
  require_rank2(*this, "cols()");
  return shape_[1];
}

void Dense::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Dense::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Dense matmul(const Dense& a, const Dense& b) {
  require_rank2(a, "matmul");
  require_rank2(b, "matmul");
  if (a.cols() != b.rows())
    throw std::invalid_argument("matmul: inner dimensions differ, " + to_string(a.shape()) +
                                " x " + to_string(b.shape()));
  Dense c({a.rows(), b.cols()});
  kernels::gemm(a.data(), b.data(), c.data(), a.rows(), a.cols(), b.cols());
  return c;
}

Dense transpose(const Dense& a) {
  require_rank2(a, "transpose");
  const std::size_t r = a.rows(), c = a.cols();
  Dense t({c, r});
  constexpr std::size_t kBlock = 32;
  for (std::size_t i0 = 0; i0 < r; i0 += kBlock)
    for (std::size_t j0 = 0; j0 < c; j0 += kBlock)
      for (std::size_t i = i0; i < std::min(r, i0 + kBlock); ++i)
        for (std::size_t j = j0; j < std::min(c, j0 + kBlock); ++j) t(j, i) = a(i, j);
  return t;
}

Dense matmul_tn(const Dense& a, const Dense& b) {
  require_rank2(a, "matmul_tn");
  if (a.rows() != b.rows())
    throw std::invalid_argument("matmul_tn: row counts differ, " + to_string(a.shape()) +
                                "^T x " + to_string(b.shape()));
  return matmul(transpose(a), b);
}

Dense matmul_nt(const Dense& a, const Dense& b) {
  require_rank2(b, "matmul_nt");
  if (a.cols() != b.cols())
    throw std::invalid_argument("matmul_nt: column counts differ, " + to_string(a.shape()) +
                                " x " + to_string(b.shape()) + "^T");
  return matmul(a, transpose(b));
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("dot: lengths differ (" + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double l2_norm(std::span<const double> a) noexcept {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size())
    throw std::invalid_argument("axpy: lengths differ (" + std::to_string(x.size()) + " vs " +
                                std::to_string(y.size()) + ")");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void scale(std::span<double> x, double alpha) noexcept {
  for (double& v : x) v *= alpha;
}

}  // namespace layerspin
