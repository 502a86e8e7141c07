#include "skycolor/types.hpp"

#include <algorithm>
#include <cctype>

namespace skycolor {

namespace {

constexpr std::string_view kCodes[kChannelCount] = {
    "c1", "c2", "c3", "c4", "c5", "c6", "c7", "c8",
    "c9", "c10", "c11", "c12", "c13", "c14", "c15", "c16",
};

constexpr std::string_view kNames[kChannelCount] = {
    "R", "G", "B", "H", "S", "V", "Y", "I",
    "Q", "L*", "a*", "b*", "R/B", "R-B", "(B-R)/(B+R)", "C",
};

}  // namespace

Channel channel_from_index(int index) {
    if (index < 0 || index >= kChannelCount)
        throw Error("channel index out of range: " + std::to_string(index));
    return static_cast<Channel>(index);
}

std::string_view channel_code(Channel c) { return kCodes[channel_index(c)]; }

std::string_view channel_name(Channel c) { return kNames[channel_index(c)]; }

std::optional<Channel> parse_channel(std::string_view text) {
    if (text.empty()) return std::nullopt;
    // "c7" / "C7" style codes
    if ((text[0] == 'c' || text[0] == 'C') && text.size() <= 3 &&
        std::all_of(text.begin() + 1, text.end(), [](unsigned char ch) { return std::isdigit(ch); })) {
        int n = 0;
        for (size_t i = 1; i < text.size(); ++i) n = n * 10 + (text[i] - '0');
        if (n >= 1 && n <= kChannelCount) return static_cast<Channel>(n - 1);
        return std::nullopt;
    }
    for (int i = 0; i < kChannelCount; ++i)
        if (text == kNames[i]) return static_cast<Channel>(i);
    return std::nullopt;
}

RgbImage make_rgb_image(int width, int height, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    RgbImage image;
    image.width = width;
    image.height = height;
    image.rgb.resize(static_cast<size_t>(width) * height * 3);
    for (int i = 0; i < width * height; ++i) {
        image.rgb[3 * i + 0] = r;
        image.rgb[3 * i + 1] = g;
        image.rgb[3 * i + 2] = b;
    }
    return image;
}

long long SegmentationMask::cloud_count() const {
    long long n = 0;
    for (std::uint8_t v : labels) n += (v != 0);
    return n;
}

double SegmentationMask::cloud_fraction() const {
    if (labels.empty()) return 0.0;
    return static_cast<double>(cloud_count()) / static_cast<double>(labels.size());
}

}  // namespace skycolor
