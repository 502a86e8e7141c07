#pragma once

#include <cstdint>
#include <string>

#include "skycolor/types.hpp"

namespace skycolor::colorspace {

struct Hsv {
    double h;  // degrees, [0, 360)
    double s;  // [0, 1]
    double v;  // [0, 1]
};

struct Yiq {
    double y;
    double i;
    double q;
};

struct Lab {
    double l;  // [0, 100]
    double a;
    double b;
};

struct Derived {
    double ratio_rb;  // R / max(B, 1), 8-bit domain
    double diff_rb;   // R - B
    double norm_br;   // (B - R) / (B + R), 0 when B + R = 0
    double chroma;    // max(R,G,B) - min(R,G,B)
};

// Hexcone HSV from r,g,b in [0,1]. Achromatic pixels get h = 0, s = 0.
Hsv to_hsv(double r, double g, double b);

// NTSC YIQ from r,g,b in [0,1].
Yiq to_yiq(double r, double g, double b);

// CIE L*a*b* (D65) from sRGB-encoded r,g,b in [0,1].
Lab to_lab(double r, double g, double b);

// Red-blue combinations and chroma from 8-bit components.
Derived derived_channels(std::uint8_t r, std::uint8_t g, std::uint8_t b);

// All 16 channels of one pixel, in c1..c16 order. c1-c3, c14, c16 stay in the
// 0-255 domain; the float-space channels are computed from r,g,b / 255.
std::array<double, kChannelCount> pixel_channels(std::uint8_t r, std::uint8_t g, std::uint8_t b);

// Row p of the result holds the channels of pixel p (row-major traversal).
ChannelStack extract_channels(const RgbImage& image, std::string image_id = {});

}  // namespace skycolor::colorspace
