#include "skycolor/colorspace.hpp"

#include <algorithm>
#include <cmath>

namespace skycolor::colorspace {

namespace {

// sRGB to XYZ (D65) matrix, IEC 61966-2-1.
constexpr double kRgbToXyz[3][3] = {
    {0.4124564, 0.3575761, 0.1804375},
    {0.2126729, 0.7151522, 0.0721750},
    {0.0193339, 0.1191920, 0.9503041},
};

// D65 reference white.
constexpr double kWhiteX = 0.95047;
constexpr double kWhiteY = 1.00000;
constexpr double kWhiteZ = 1.08883;

inline double srgb_to_linear(double u) {
    return (u <= 0.04045) ? u / 12.92 : std::pow((u + 0.055) / 1.055, 2.4);
}

inline double lab_f(double t) {
    constexpr double eps = 216.0 / 24389.0;  // (6/29)^3
    constexpr double kappa = 24389.0 / 27.0;
    return (t > eps) ? std::cbrt(t) : (kappa * t + 16.0) / 116.0;
}

}  // namespace

Hsv to_hsv(double r, double g, double b) {
    const double v = std::max({r, g, b});
    const double lo = std::min({r, g, b});
    const double chroma = v - lo;
    const double s = (v > 0.0) ? chroma / v : 0.0;
    double h = 0.0;
    if (chroma > 0.0) {
        if (v == r)
            h = 60.0 * ((g - b) / chroma);
        else if (v == g)
            h = 60.0 * ((b - r) / chroma + 2.0);
        else
            h = 60.0 * ((r - g) / chroma + 4.0);
        if (h < 0.0) h += 360.0;
        if (h >= 360.0) h -= 360.0;
    }
    return {h, s, v};
}

Yiq to_yiq(double r, double g, double b) {
    return {
        0.299 * r + 0.587 * g + 0.114 * b,
        0.596 * r - 0.274 * g - 0.322 * b,
        0.211 * r - 0.523 * g + 0.312 * b,
    };
}

Lab to_lab(double r, double g, double b) {
    const double rl = srgb_to_linear(r);
    const double gl = srgb_to_linear(g);
    const double bl = srgb_to_linear(b);
    const double x = kRgbToXyz[0][0] * rl + kRgbToXyz[0][1] * gl + kRgbToXyz[0][2] * bl;
    const double y = kRgbToXyz[1][0] * rl + kRgbToXyz[1][1] * gl + kRgbToXyz[1][2] * bl;
    const double z = kRgbToXyz[2][0] * rl + kRgbToXyz[2][1] * gl + kRgbToXyz[2][2] * bl;
    const double fx = lab_f(x / kWhiteX);
    const double fy = lab_f(y / kWhiteY);
    const double fz = lab_f(z / kWhiteZ);
    return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

Derived derived_channels(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    const double rd = r, gd = g, bd = b;
    Derived d;
    d.ratio_rb = rd / std::max(bd, 1.0);
    d.diff_rb = rd - bd;
    d.norm_br = (rd + bd > 0.0) ? (bd - rd) / (bd + rd) : 0.0;
    d.chroma = std::max({rd, gd, bd}) - std::min({rd, gd, bd});
    return d;
}

std::array<double, kChannelCount> pixel_channels(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    const double ru = r / 255.0, gu = g / 255.0, bu = b / 255.0;
    const Hsv hsv = to_hsv(ru, gu, bu);
    const Yiq yiq = to_yiq(ru, gu, bu);
    const Lab lab = to_lab(ru, gu, bu);
    const Derived der = derived_channels(r, g, b);
    return {
        static_cast<double>(r), static_cast<double>(g), static_cast<double>(b),
        hsv.h, hsv.s, hsv.v,
        yiq.y, yiq.i, yiq.q,
        lab.l, lab.a, lab.b,
        der.ratio_rb, der.diff_rb, der.norm_br, der.chroma,
    };
}

ChannelStack extract_channels(const RgbImage& image, std::string image_id) {
    if (image.pixel_count() <= 0) throw EmptyImage();
    ChannelStack stack;
    stack.image_id = std::move(image_id);
    stack.width = image.width;
    stack.height = image.height;
    stack.values.resize(static_cast<size_t>(stack.rows()) * kChannelCount);
    for (int p = 0; p < stack.rows(); ++p) {
        const std::uint8_t* px = image.pixel(p);
        const auto ch = pixel_channels(px[0], px[1], px[2]);
        std::copy(ch.begin(), ch.end(), stack.values.begin() + static_cast<size_t>(p) * kChannelCount);
    }
    return stack;
}

}  // namespace skycolor::colorspace
