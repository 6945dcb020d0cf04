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

#ifndef LAYERSPIN_FORMAT_HPP_
#define LAYERSPIN_FORMAT_HPP_

#include <charconv>
#include <string>

namespace layerspin {

/// Shortest decimal text that parses back to exactly `v`.
inline std::string fmt_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace layerspin

#endif  // LAYERSPIN_FORMAT_HPP_
