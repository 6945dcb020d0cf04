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

#ifndef LAYERSPIN_DATASET_HPP_
#define LAYERSPIN_DATASET_HPP_

#include <cstdint>
#include <filesystem>
#include <limits>
#include <stdexcept>
#include <vector>

#include "layerspin/tensor.hpp"

namespace layerspin {

/// Malformed IDX input. `offset` is the byte position where reading failed.
class DataFormatError : public std::runtime_error {
 public:
  DataFormatError(const std::string& what, std::uint64_t offset)
      : std::runtime_error(what + " (byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;  // 2051
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;  // 2049

/// Samples as rows of `images` with values in [0, 1].
struct Dataset {
  Dense images;
  std::vector<int> labels;
  std::size_t classes = 10;
  std::size_t image_rows = 0;  // 0 when samples are not images
  std::size_t image_cols = 0;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dimension() const { return images.cols(); }
};

inline constexpr std::size_t kNoCap = std::numeric_limits<std::size_t>::max();

/// Reads a big-endian IDX image/label pair (optionally gzip-compressed).
/// Pixels are scaled by 1/255 and flattened row-major. At most
/// `per_class_cap` samples of each label are kept, in file order.
Dataset load_mnist_idx(const std::filesystem::path& images_path,
                       const std::filesystem::path& labels_path,
                       std::size_t per_class_cap = kNoCap, std::size_t classes = 10);

/// Writes IDX files; gzip-compressed when the name ends in ".gz". Pixels are
/// stored as round(255 * v).
void write_idx_images(const std::filesystem::path& path, const Dataset& data);
void write_idx_labels(const std::filesystem::path& path, const std::vector<int>& labels);

struct BlobSpec {
  std::size_t classes = 10;
  std::size_t per_class = 100;
  std::size_t dimension = 16;
  double spread = 0.15;
  std::uint64_t seed = 1;
};

/// Gaussian clusters around per-class centers drawn in [0.2, 0.8]^d,
/// clamped to [0, 1] and rounded to multiples of 1/255. Samples cycle
/// through the classes. Centers depend only on (seed, classes, dimension);
/// `sample_stream` selects independent draws around them (0 for train,
/// 1 for test).
Dataset make_synthetic_blobs(const BlobSpec& spec, std::uint64_t sample_stream = 0);

}  // namespace layerspin

#endif  // LAYERSPIN_DATASET_HPP_
