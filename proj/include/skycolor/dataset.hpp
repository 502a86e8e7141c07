#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "skycolor/types.hpp"

namespace skycolor::dataset {

struct ManifestEntry {
    std::string id;
    std::filesystem::path image_path;  // resolved against the manifest directory
    std::filesystem::path truth_path;
};

struct DatasetManifest {
    std::filesystem::path root;
    std::vector<ManifestEntry> entries;
};

// One line per entry: image_id<TAB>image_relpath<TAB>truth_relpath.
// '#' starts a comment; blank lines are skipped. Referenced files must exist.
DatasetManifest read_manifest(const std::filesystem::path& manifest_path);

struct LabeledImage {
    std::string id;
    RgbImage image;
    SegmentationMask truth;
};

// Decoded pairs in manifest order. Truth files must be grayscale PNGs with
// pixel values exactly {0, 255} (0 = sky, 255 = cloud).
std::vector<LabeledImage> load_dataset(const std::filesystem::path& manifest_path);

enum class CloudShape { Disk, PerlinBlob };

struct SynthSpec {
    int width = 128;
    int height = 128;  // >= 16 each
    CloudShape shape = CloudShape::Disk;
    std::array<std::uint8_t, 3> sky_top{60, 110, 205};
    std::array<std::uint8_t, 3> sky_bottom{105, 155, 230};
    std::array<std::uint8_t, 3> cloud_color{236, 238, 240};
    double noise_sigma = 8.0;  // >= 0, 8-bit units
    std::uint64_t seed = 1;
    double center_x = 0.5;   // cloud center, relative
    double center_y = 0.45;
    double radius = 0.28;    // relative to min(width, height)
};

struct SynthResult {
    RgbImage image;
    SegmentationMask truth;
};

// Deterministic: identical spec -> identical bytes. The truth mask is the
// generator's own region predicate.
SynthResult generate_synthetic(const SynthSpec& spec);

// A varied, reproducible batch: shapes alternate, cloud placement/size and
// gradients vary per index, noise_sigma cycles within [4, max_noise_sigma].
std::vector<SynthSpec> fixture_specs(int count, int width, int height, double max_noise_sigma,
                                     std::uint64_t master_seed);

}  // namespace skycolor::dataset
