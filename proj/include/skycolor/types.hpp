#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace skycolor {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EmptyImage : public Error {
public:
    EmptyImage() : Error("image has no pixels") {}
};

class DegenerateDistribution : public Error {
public:
    DegenerateDistribution() : Error("distribution has zero variance") {}
};

class DegenerateChannel : public Error {
public:
    explicit DegenerateChannel(int channel_index)
        : Error("channel c" + std::to_string(channel_index + 1) + " has zero variance"),
          channel_index(channel_index) {}
    int channel_index;
};

class TooFewRows : public Error {
public:
    TooFewRows() : Error("need at least 2 rows") {}
};

class NotSymmetric : public Error {
public:
    NotSymmetric() : Error("matrix is not symmetric") {}
};

class SameChannel : public Error {
public:
    SameChannel() : Error("channel pair must be distinct") {}
};

class DegenerateInput : public Error {
public:
    using Error::Error;
    DegenerateInput() : Error("all feature rows are identical") {}
};

class NonFinite : public Error {
public:
    NonFinite() : Error("non-finite value encountered") {}
};

class ShapeMismatch : public Error {
public:
    using Error::Error;
    ShapeMismatch() : Error("shapes do not match") {}
};

class MissingFile : public Error {
public:
    explicit MissingFile(const std::string& path) : Error("missing file: " + path) {}
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class NonBinaryTruth : public Error {
public:
    using Error::Error;
};

class DegeneratePredictor : public Error {
public:
    DegeneratePredictor() : Error("predictor values are all equal") {}
};

class DecodeError : public Error {
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Channels (c1..c16)
// ---------------------------------------------------------------------------

// The 16 analysis channels, in stable order: R,G,B, H,S,V, Y,I,Q, L*,a*,b*,
// R/B, R-B, (B-R)/(B+R), C.
enum class Channel : int {
    R = 0,
    G,
    B,
    H,
    S,
    V,
    Y,
    I,
    Q,
    LStar,
    AStar,
    BStar,
    RatioRB,
    DiffRB,
    NormBR,
    Chroma,
};

inline constexpr int kChannelCount = 16;

constexpr int channel_index(Channel c) { return static_cast<int>(c); }
Channel channel_from_index(int index);  // 0-based, throws Error when out of range

std::string_view channel_code(Channel c);  // "c1".."c16"
std::string_view channel_name(Channel c);  // "R", "S", "R/B", ...

// Accepts "c1".."c16" (case-insensitive) or a channel name ("R", "S", "R/B", ...).
std::optional<Channel> parse_channel(std::string_view text);

// ---------------------------------------------------------------------------
// Images and masks
// ---------------------------------------------------------------------------

struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel

    int pixel_count() const { return width * height; }
    const std::uint8_t* pixel(int index) const { return rgb.data() + 3 * index; }
    std::uint8_t* pixel(int index) { return rgb.data() + 3 * index; }
};

RgbImage make_rgb_image(int width, int height, std::uint8_t r = 0, std::uint8_t g = 0,
                        std::uint8_t b = 0);

enum class PixelClass : std::uint8_t { Sky = 0, Cloud = 1 };

struct SegmentationMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> labels;  // 0 = sky, 1 = cloud, row-major
    std::string provenance;            // channels used, config hash

    int pixel_count() const { return width * height; }
    bool cloud(int index) const { return labels[static_cast<size_t>(index)] != 0; }
    long long cloud_count() const;
    double cloud_fraction() const;
};

// ---------------------------------------------------------------------------
// Channel stack: pixels x 16 channel values (row-major)
// ---------------------------------------------------------------------------

struct ChannelStack {
    std::string image_id;
    int width = 0;
    int height = 0;
    std::vector<double> values;  // rows() x 16

    int rows() const { return width * height; }
    double at(int row, int channel) const {
        return values[static_cast<size_t>(row) * kChannelCount + channel];
    }
    double at(int row, Channel channel) const { return at(row, channel_index(channel)); }
    double& at(int row, int channel) {
        return values[static_cast<size_t>(row) * kChannelCount + channel];
    }
};

}  // namespace skycolor
