#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "skycolor/types.hpp"

namespace skycolor::io {

struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;
};

// Decodes a PNG or JPEG (detected by signature) to 8-bit RGB. Grayscale and
// palette images are expanded; any alpha channel is rejected.
RgbImage load_rgb8(const std::filesystem::path& path);

// Strict grayscale PNG (no palette, no color, no alpha, <= 8 bit).
GrayImage load_gray8_png(const std::filesystem::path& path);

// Grayscale PNG whose pixels must all be 0 (sky) or 255 (cloud).
// Throws NonBinaryTruth listing the offending values.
SegmentationMask load_truth_mask(const std::filesystem::path& path);

void save_png_rgb8(const std::filesystem::path& path, const RgbImage& image);
void save_png_gray8(const std::filesystem::path& path, const GrayImage& image);

// 1-bit grayscale PNG, cloud = white.
void save_png_mask(const std::filesystem::path& path, const SegmentationMask& mask);

void save_jpeg_rgb8(const std::filesystem::path& path, const RgbImage& image, int quality = 90);

// Run-length text form for golden fixtures: "SKYRLE v1", "W H", then run
// lengths alternating sky-first.
std::string mask_to_rle(const SegmentationMask& mask);
SegmentationMask mask_from_rle(std::string_view text);

// Linear min->0, max->255 mapping for grid rasters; constant input maps to 0.
GrayImage gray_raster(std::span<const double> values, int width, int height);

}  // namespace skycolor::io
