/*
   Copyright 2026 The bfseg Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

// On-disk fixtures shared by the CLI tests and the acceptance run.

#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>

#include "bfseg/image_io.hpp"

namespace fixtures {

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("bfseg_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// A 4x4 background crop split half/half between `level` and `level + 2 sd`,
/// whose population SD is exactly `sd`.
inline bfseg::RasterImage two_level_crop(int level, int sd) {
  bfseg::RasterImage img(4, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) {
      const auto v = static_cast<std::uint8_t>((x + y) % 2 ? level + 2 * sd : level);
      img.set(x, y, v, v, v);
    }
  return img;
}

}  // namespace fixtures
