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

#ifndef LAYERSPIN_TENSOR_HPP_
#define LAYERSPIN_TENSOR_HPP_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace layerspin {

using Shape = std::vector<std::size_t>;

std::string to_string(const Shape& shape);

/// Dense row-major array of doubles.
///
/// The flat order of a 2-D tensor is row by row, so the flattened weight
/// vector of a fan_in x fan_out layer lists the outgoing weights of input 0
/// first. Cosine distances and rotation angles are computed over this order.
class Dense {
 public:
  Dense() = default;
  explicit Dense(Shape shape);  // zero-filled
  Dense(Shape shape, std::vector<double> data);

  static Dense zeros(std::size_t rows, std::size_t cols) { return Dense({rows, cols}); }
  static Dense identity(std::size_t n);
  static Dense from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Dense vector(std::vector<double> values);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  // 2-D accessors; throw on rank != 2.
  std::size_t rows() const;
  std::size_t cols() const;

  double& operator()(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> flat() noexcept { return data_; }
  std::span<const double> flat() const noexcept { return data_; }
  std::span<double> row(std::size_t r) { return flat().subspan(r * cols(), cols()); }
  std::span<const double> row(std::size_t r) const { return flat().subspan(r * cols(), cols()); }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  const std::vector<double>& values() const noexcept { return data_; }

  void fill(double v);
  bool all_finite() const noexcept;

  friend bool operator==(const Dense& a, const Dense& b) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// a[m x k] * b[k x n]. Uses the OpenMP gemm kernel.
Dense matmul(const Dense& a, const Dense& b);
/// a^T * b without materializing the caller's transpose.
Dense matmul_tn(const Dense& a, const Dense& b);
/// a * b^T.
Dense matmul_nt(const Dense& a, const Dense& b);
Dense transpose(const Dense& a);

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> a) noexcept;

/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void scale(std::span<double> x, double alpha) noexcept;

}  // namespace layerspin

#endif  // LAYERSPIN_TENSOR_HPP_
