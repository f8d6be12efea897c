// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 DataScout Contributors

#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "datascout/core/error.hpp"
#include "datascout/core/fs.hpp"
#include "datascout/core/rng.hpp"
#include "datascout/modelgw.hpp"

namespace datascout::analyze {

inline constexpr std::size_t kMaxCaptionedImages = 32;
inline constexpr std::uint64_t kCaptionSampleSeed = 42;
inline constexpr std::string_view kCaptionUnavailable = "[caption unavailable]";

/// Indices of the images to caption: all of them up to the cap, otherwise a
/// seeded uniform sample without replacement, returned in input order.
inline std::vector<std::size_t> sample_image_indices(std::size_t count, std::size_t cap = kMaxCaptionedImages,
                                                     std::uint64_t seed = kCaptionSampleSeed) {
  std::vector<std::size_t> idx(count);
  for (std::size_t i = 0; i < count; ++i) idx[i] = i;
  if (count <= cap) return idx;
  Rng rng(seed);
  rng.shuffle(idx);
  idx.resize(cap);
  std::sort(idx.begin(), idx.end());
  return idx;
}

struct ImageCaption {
  std::filesystem::path path;
  std::string caption;
};

/// Captions the sampled images. A failure on one image puts the placeholder
/// caption at its position and moves on.
inline std::vector<ImageCaption> caption_image_set(const std::vector<std::filesystem::path>& image_paths,
                                                   const modelgw::Gateway& gateway,
                                                   std::uint64_t seed = kCaptionSampleSeed) {
  std::vector<ImageCaption> out;
  for (auto i : sample_image_indices(image_paths.size(), kMaxCaptionedImages, seed)) {
    ImageCaption c{image_paths[i], std::string(kCaptionUnavailable)};
    try {
      c.caption = gateway.caption(fs::read_file(image_paths[i]));
    } catch (const Error&) {
      c.caption = std::string(kCaptionUnavailable);
    }
    out.push_back(std::move(c));
  }
  return out;
}

inline std::vector<std::string> caption_images(const std::vector<std::filesystem::path>& image_paths,
                                               const modelgw::Gateway& gateway,
                                               std::uint64_t seed = kCaptionSampleSeed) {
  std::vector<std::string> out;
  for (auto& c : caption_image_set(image_paths, gateway, seed)) out.push_back(std::move(c.caption));
  return out;
}

}  // namespace datascout::analyze
