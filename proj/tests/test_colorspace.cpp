#include <doctest.h>

#include <cmath>
#include <random>

#include "skycolor/colorspace.hpp"
#include "test_util.hpp"

using namespace skycolor;
using namespace skycolor::colorspace;

namespace {

// Inverse hexcone HSV, test-only; the library deliberately has no public inverse.
void hsv_to_rgb(double h, double s, double v, double& r, double& g, double& b) {
    const double c = v * s;
    const double hp = h / 60.0;
    const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
    double r1 = 0, g1 = 0, b1 = 0;
    if (hp < 1) {
        r1 = c; g1 = x;
    } else if (hp < 2) {
        r1 = x; g1 = c;
    } else if (hp < 3) {
        g1 = c; b1 = x;
    } else if (hp < 4) {
        g1 = x; b1 = c;
    } else if (hp < 5) {
        r1 = x; b1 = c;
    } else {
        r1 = c; b1 = x;
    }
    const double m = v - c;
    r = r1 + m;
    g = g1 + m;
    b = b1 + m;
}

}  // namespace

TEST_SUITE_BEGIN("colorspace");

TEST_CASE("hsv basics") {
    const Hsv red = to_hsv(1, 0, 0);
    CHECK(red.h == doctest::Approx(0.0));
    CHECK(red.s == doctest::Approx(1.0));
    CHECK(red.v == doctest::Approx(1.0));

    const Hsv gray = to_hsv(0.5, 0.5, 0.5);
    CHECK(gray.h == 0.0);
    CHECK(gray.s == 0.0);
    CHECK(gray.v == doctest::Approx(0.5));

    const Hsv blue = to_hsv(0, 0, 1);
    CHECK(blue.h == doctest::Approx(240.0));
    CHECK(blue.s == doctest::Approx(1.0));
    CHECK(blue.v == doctest::Approx(1.0));

    const Hsv black = to_hsv(0, 0, 0);
    CHECK(black.s == 0.0);
    CHECK(black.v == 0.0);
}

TEST_CASE("hsv round trip for non-achromatic pixels") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
        const double r = testutil::uniform(rng);
        const double g = testutil::uniform(rng);
        const double b = testutil::uniform(rng);
        const Hsv hsv = to_hsv(r, g, b);
        if (hsv.s == 0.0 || hsv.v == 0.0) continue;
        double r2, g2, b2;
        hsv_to_rgb(hsv.h, hsv.s, hsv.v, r2, g2, b2);
        CHECK(r2 == doctest::Approx(r).epsilon(1e-6));
        CHECK(g2 == doctest::Approx(g).epsilon(1e-6));
        CHECK(b2 == doctest::Approx(b).epsilon(1e-6));
    }
}

TEST_CASE("yiq transform") {
    const Yiq white = to_yiq(1, 1, 1);
    CHECK(std::abs(white.y - 1.0) < 1e-3);
    CHECK(std::abs(white.i) < 1e-3);
    CHECK(std::abs(white.q) < 1e-3);

    const Yiq black = to_yiq(0, 0, 0);
    CHECK(black.y == 0.0);
    CHECK(black.i == 0.0);
    CHECK(black.q == 0.0);

    const Yiq red = to_yiq(1, 0, 0);
    CHECK(red.y == doctest::Approx(0.299));
    CHECK(red.i == doctest::Approx(0.596));
    CHECK(red.q == doctest::Approx(0.211));
}

TEST_CASE("lab transform") {
    const Lab white = to_lab(1, 1, 1);
    CHECK(std::abs(white.l - 100.0) < 0.5);
    CHECK(std::abs(white.a) < 0.5);
    CHECK(std::abs(white.b) < 0.5);

    const Lab black = to_lab(0, 0, 0);
    CHECK(std::abs(black.l) < 1e-9);
    CHECK(std::abs(black.a) < 1e-9);
    CHECK(std::abs(black.b) < 1e-9);

    const Lab red = to_lab(1, 0, 0);
    CHECK(std::abs(red.l - 53.24) < 0.5);
    CHECK(std::abs(red.a - 80.09) < 0.5);
    CHECK(std::abs(red.b - 67.20) < 0.5);
}

TEST_CASE("derived channels") {
    const Derived d1 = derived_channels(100, 0, 50);
    CHECK(d1.ratio_rb == doctest::Approx(2.0));
    CHECK(d1.diff_rb == doctest::Approx(50.0));
    CHECK(d1.norm_br == doctest::Approx(-1.0 / 3.0));
    CHECK(d1.chroma == doctest::Approx(100.0));

    const Derived black = derived_channels(0, 0, 0);
    CHECK(black.ratio_rb == 0.0);
    CHECK(black.diff_rb == 0.0);
    CHECK(black.norm_br == 0.0);
    CHECK(black.chroma == 0.0);

    const Derived gray = derived_channels(50, 50, 50);
    CHECK(gray.ratio_rb == doctest::Approx(1.0));
    CHECK(gray.diff_rb == 0.0);
    CHECK(gray.norm_br == 0.0);
    CHECK(gray.chroma == 0.0);
}

TEST_CASE("extract channels on 1x1 white") {
    const RgbImage image = make_rgb_image(1, 1, 255, 255, 255);
    const ChannelStack stack = extract_channels(image, "white");
    REQUIRE(stack.rows() == 1);
    CHECK(stack.at(0, Channel::R) == 255.0);
    CHECK(stack.at(0, Channel::G) == 255.0);
    CHECK(stack.at(0, Channel::B) == 255.0);
    CHECK(stack.at(0, Channel::H) == 0.0);
    CHECK(stack.at(0, Channel::S) == 0.0);
    CHECK(stack.at(0, Channel::V) == doctest::Approx(1.0));
    CHECK(std::abs(stack.at(0, Channel::Y) - 1.0) < 1e-3);
    CHECK(std::abs(stack.at(0, Channel::I)) < 1e-3);
    CHECK(std::abs(stack.at(0, Channel::Q)) < 1e-3);
    CHECK(std::abs(stack.at(0, Channel::LStar) - 100.0) < 0.5);
    CHECK(std::abs(stack.at(0, Channel::AStar)) < 0.5);
    CHECK(std::abs(stack.at(0, Channel::BStar)) < 0.5);
    CHECK(stack.at(0, Channel::RatioRB) == doctest::Approx(1.0));
    CHECK(stack.at(0, Channel::DiffRB) == 0.0);
    CHECK(stack.at(0, Channel::NormBR) == 0.0);
    CHECK(stack.at(0, Channel::Chroma) == 0.0);
}

TEST_CASE("extract channels shape and ranges") {
    RgbImage image = make_rgb_image(2, 2);
    image.rgb = {10, 20, 30, 200, 100, 0, 0, 0, 0, 255, 255, 255};
    const ChannelStack stack = extract_channels(image, "2x2");
    CHECK(stack.rows() == 4);
    CHECK(stack.values.size() == 4 * 16);

    std::mt19937_64 rng(22);
    RgbImage random = make_rgb_image(8, 8);
    for (auto& byte : random.rgb) byte = static_cast<std::uint8_t>(rng() % 256);
    const ChannelStack rs = extract_channels(random, "random");
    for (int p = 0; p < rs.rows(); ++p) {
        for (int j = 0; j < kChannelCount; ++j) CHECK(std::isfinite(rs.at(p, j)));
        CHECK(rs.at(p, Channel::H) >= 0.0);
        CHECK(rs.at(p, Channel::H) < 360.0);
        CHECK(rs.at(p, Channel::S) >= 0.0);
        CHECK(rs.at(p, Channel::S) <= 1.0);
        CHECK(rs.at(p, Channel::V) >= 0.0);
        CHECK(rs.at(p, Channel::V) <= 1.0);
        CHECK(rs.at(p, Channel::LStar) >= 0.0);
        CHECK(rs.at(p, Channel::LStar) <= 100.0);
        CHECK(rs.at(p, Channel::NormBR) >= -1.0);
        CHECK(rs.at(p, Channel::NormBR) <= 1.0);
        CHECK(rs.at(p, Channel::Chroma) >= 0.0);
        CHECK(rs.at(p, Channel::Chroma) <= 255.0);
    }
}

TEST_CASE("extract equals per-pixel composition") {
    std::mt19937_64 rng(33);
    RgbImage image = make_rgb_image(5, 3);
    for (auto& byte : image.rgb) byte = static_cast<std::uint8_t>(rng() % 256);
    const ChannelStack stack = extract_channels(image, "compose");
    for (int p = 0; p < stack.rows(); ++p) {
        const std::uint8_t* px = image.pixel(p);
        const auto expected = pixel_channels(px[0], px[1], px[2]);
        for (int j = 0; j < kChannelCount; ++j) CHECK(stack.at(p, j) == expected[static_cast<size_t>(j)]);
    }
}

TEST_CASE("intensity scaling leaves ratio channels unchanged") {
    std::mt19937_64 rng(44);
    for (int i = 0; i < 100; ++i) {
        // base * 10 is divisible by every alpha denominator below
        const int r10 = static_cast<int>(rng() % 25 + 1) * 10;
        const int g10 = static_cast<int>(rng() % 25 + 1) * 10;
        const int b10 = static_cast<int>(rng() % 25 + 1) * 10;
        for (const int denom : {10, 5, 2}) {  // alpha = 1/10, 1/5, 1/2
            const auto scale = [&](int v) { return static_cast<std::uint8_t>(v / denom); };
            const auto full = pixel_channels(static_cast<std::uint8_t>(r10),
                                             static_cast<std::uint8_t>(g10),
                                             static_cast<std::uint8_t>(b10));
            const auto reduced = pixel_channels(scale(r10), scale(g10), scale(b10));
            CHECK(std::abs(full[channel_index(Channel::H)] -
                           reduced[channel_index(Channel::H)]) < 1e-6);
            CHECK(std::abs(full[channel_index(Channel::RatioRB)] -
                           reduced[channel_index(Channel::RatioRB)]) < 1e-6);
            CHECK(std::abs(full[channel_index(Channel::NormBR)] -
                           reduced[channel_index(Channel::NormBR)]) < 1e-6);
        }
    }
}

TEST_CASE("empty image rejected") {
    RgbImage empty;
    CHECK_THROWS_AS(extract_channels(empty, "none"), EmptyImage);
}

TEST_CASE("channel codes and parsing") {
    CHECK(channel_code(Channel::S) == "c5");
    CHECK(channel_name(Channel::RatioRB) == "R/B");
    CHECK(parse_channel("c13") == Channel::RatioRB);
    CHECK(parse_channel("C5") == Channel::S);
    CHECK(parse_channel("R/B") == Channel::RatioRB);
    CHECK(parse_channel("L*") == Channel::LStar);
    CHECK_FALSE(parse_channel("c17").has_value());
    CHECK_FALSE(parse_channel("c0").has_value());
    CHECK_FALSE(parse_channel("").has_value());
}

TEST_SUITE_END();
