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

#include "layerspin/dataset.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <memory>

#include "layerspin/rng.hpp"

namespace layerspin {
namespace {

// Sequential reader over a plain or gzip file (zlib reads both).
class ByteReader {
 public:
  explicit ByteReader(const std::filesystem::path& path) : path_(path.string()) {
    file_ = gzopen(path_.c_str(), "rb");
    if (file_ == nullptr) throw std::runtime_error("cannot open " + path_);
  }
  ~ByteReader() { gzclose(file_); }
  ByteReader(const ByteReader&) = delete;
  ByteReader& operator=(const ByteReader&) = delete;

  std::uint64_t offset() const noexcept { return offset_; }

  void read(unsigned char* dst, std::size_t n, const char* what) {
    std::size_t got = 0;
    while (got < n) {
      const unsigned chunk = static_cast<unsigned>(std::min<std::size_t>(n - got, 1u << 30));
      const int r = gzread(file_, dst + got, chunk);
      if (r < 0) throw std::runtime_error(path_ + ": read error");
      if (r == 0) break;
      got += static_cast<std::size_t>(r);
    }
    if (got < n)
      throw DataFormatError(path_ + ": truncated " + what + ", expected " + std::to_string(n) +
                                " bytes, got " + std::to_string(got),
                            offset_ + got);
    offset_ += n;
  }

  std::uint32_t read_u32(const char* what) {
    std::array<unsigned char, 4> b{};
    read(b.data(), 4, what);
    return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) |
           std::uint32_t{b[3]};
  }

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
  gzFile file_ = nullptr;
  std::uint64_t offset_ = 0;
};

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>((v >> 24) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>(v & 0xff));
}

void write_bytes(const std::filesystem::path& path, const std::string& bytes) {
  if (path.extension() == ".gz") {
    gzFile f = gzopen(path.string().c_str(), "wb9");
    if (f == nullptr) throw std::runtime_error("cannot write " + path.string());
    const int n = gzwrite(f, bytes.data(), static_cast<unsigned>(bytes.size()));
    const int rc = gzclose(f);
    if (n != static_cast<int>(bytes.size()) || rc != Z_OK)
      throw std::runtime_error("write failed: " + path.string());
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

Dataset load_mnist_idx(const std::filesystem::path& images_path,
                       const std::filesystem::path& labels_path, std::size_t per_class_cap,
                       std::size_t classes) {
  ByteReader img(images_path);
  ByteReader lab(labels_path);

  const std::uint32_t img_magic = img.read_u32("image header");
  if (img_magic != kIdxImageMagic)
    throw DataFormatError(img.path() + ": bad image magic " + std::to_string(img_magic) +
                              ", expected 2051",
                          0);
  const std::uint32_t lab_magic = lab.read_u32("label header");
  if (lab_magic != kIdxLabelMagic)
    throw DataFormatError(lab.path() + ": bad label magic " + std::to_string(lab_magic) +
                              ", expected 2049",
                          0);
  const std::uint32_t n_images = img.read_u32("image header");
  const std::uint32_t rows = img.read_u32("image header");
  const std::uint32_t cols = img.read_u32("image header");
  const std::uint32_t n_labels = lab.read_u32("label header");
  if (n_images != n_labels)
    throw DataFormatError(images_path.string() + " holds " + std::to_string(n_images) +
                              " images but " + labels_path.string() + " holds " +
                              std::to_string(n_labels) + " labels",
                          4);
  if (rows == 0 || cols == 0) throw DataFormatError(img.path() + ": zero image dimension", 8);

  const std::size_t pixels = std::size_t{rows} * cols;
  std::vector<unsigned char> raw_labels(n_labels);
  lab.read(raw_labels.data(), raw_labels.size(), "label payload");

  std::vector<std::size_t> per_class(classes, 0);
  std::vector<double> data;
  std::vector<int> labels;
  std::vector<unsigned char> buf(pixels);
  for (std::size_t i = 0; i < n_images; ++i) {
    img.read(buf.data(), pixels, "image payload");
    const unsigned label = raw_labels[i];
    if (label >= classes)
      throw DataFormatError(lab.path() + ": label " + std::to_string(label) + " outside [0, " +
                                std::to_string(classes) + ")",
                            8 + i);
    if (per_class[label] >= per_class_cap) continue;
    ++per_class[label];
    labels.push_back(static_cast<int>(label));
    for (unsigned char p : buf) data.push_back(static_cast<double>(p) / 255.0);
  }

  Dataset out;
  const std::size_t n = labels.size();
  out.images = Dense({n, pixels}, std::move(data));
  out.labels = std::move(labels);
  out.classes = classes;
  out.image_rows = rows;
  out.image_cols = cols;
  return out;
}

void write_idx_images(const std::filesystem::path& path, const Dataset& data) {
  // Non-image samples are stored as 1 x dimension images.
  const std::size_t rows = data.image_rows ? data.image_rows : 1;
  const std::size_t cols = data.image_rows ? data.image_cols : data.dimension();
  if (rows * cols != data.dimension())
    throw std::invalid_argument("write_idx_images: image_rows x image_cols != sample dimension");
  std::string bytes;
  bytes.reserve(16 + data.images.size());
  put_u32(bytes, kIdxImageMagic);
  put_u32(bytes, static_cast<std::uint32_t>(data.size()));
  put_u32(bytes, static_cast<std::uint32_t>(rows));
  put_u32(bytes, static_cast<std::uint32_t>(cols));
  for (double v : data.images.flat()) {
    if (!(v >= 0.0 && v <= 1.0))
      throw std::invalid_argument("write_idx_images: pixel value outside [0, 1]");
    bytes.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
  }
  write_bytes(path, bytes);
}

void write_idx_labels(const std::filesystem::path& path, const std::vector<int>& labels) {
  std::string bytes;
  put_u32(bytes, kIdxLabelMagic);
  put_u32(bytes, static_cast<std::uint32_t>(labels.size()));
  for (int l : labels) {
    if (l < 0 || l > 255) throw std::invalid_argument("write_idx_labels: label outside a byte");
    bytes.push_back(static_cast<char>(static_cast<unsigned char>(l)));
  }
  write_bytes(path, bytes);
}

Dataset make_synthetic_blobs(const BlobSpec& spec, std::uint64_t sample_stream) {
  if (spec.classes < 2 || spec.dimension == 0 || spec.per_class == 0)
    throw std::invalid_argument("synthetic blobs need >= 2 classes, dimension >= 1, per_class >= 1");
  if (!(spec.spread >= 0.0)) throw std::invalid_argument("synthetic blobs: spread must be >= 0");

  Rng center_rng(Rng::derive(spec.seed, 0));
  std::vector<double> centers(spec.classes * spec.dimension);
  for (double& c : centers) c = center_rng.uniform(0.2, 0.8);

  Rng rng(Rng::derive(spec.seed, 1 + sample_stream));
  const std::size_t n = spec.classes * spec.per_class;
  Dataset out;
  out.classes = spec.classes;
  out.images = Dense({n, spec.dimension});
  out.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = i % spec.classes;
    out.labels[i] = static_cast<int>(k);
    for (std::size_t d = 0; d < spec.dimension; ++d) {
      const double v = std::clamp(centers[k * spec.dimension + d] + spec.spread * rng.normal(), 0.0, 1.0);
      out.images(i, d) = std::round(v * 255.0) / 255.0;  // 8-bit grid, like pixel data
    }
  }
  return out;
}

}  // namespace layerspin
