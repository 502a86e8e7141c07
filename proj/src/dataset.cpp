#include "skycolor/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>

#include "skycolor/image_io.hpp"

namespace skycolor::dataset {

namespace {

// mt19937_64 gives a portable integer stream; the float mappings below are
// pinned by hand so the byte-identical-output contract does not depend on
// library distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() {  // [0, 1)
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double gaussian() {  // Box-Muller
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

    std::uint64_t next() { return engine_(); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

std::uint8_t clamp_u8(double v) {
    return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0) + 0.5);
}

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Periodic smooth value noise on the angle, used to perturb the blob radius.
class AngularNoise {
public:
    AngularNoise(Rng& rng, int knots) : knots_(knots), values_(static_cast<size_t>(knots)) {
        for (double& v : values_) v = rng.uniform(-1.0, 1.0);
    }

    double at(double angle) const {  // angle in [0, 2*pi)
        const double t = angle / (2.0 * std::numbers::pi) * knots_;
        const int i0 = static_cast<int>(t) % knots_;
        const int i1 = (i0 + 1) % knots_;
        const double frac = t - std::floor(t);
        const double smooth = 0.5 - 0.5 * std::cos(std::numbers::pi * frac);
        return values_[static_cast<size_t>(i0)] * (1.0 - smooth) +
               values_[static_cast<size_t>(i1)] * smooth;
    }

private:
    int knots_;
    std::vector<double> values_;
};

}  // namespace

DatasetManifest read_manifest(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw MissingFile(manifest_path.string());
    DatasetManifest manifest;
    manifest.root = manifest_path.parent_path();

    std::set<std::string> seen_ids;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        const std::string text = trim(line);
        if (text.empty() || text[0] == '#') continue;
        const size_t tab1 = text.find('\t');
        const size_t tab2 = (tab1 == std::string::npos) ? std::string::npos : text.find('\t', tab1 + 1);
        if (tab1 == std::string::npos || tab2 == std::string::npos)
            throw Error("manifest line " + std::to_string(line_number) +
                        ": expected image_id<TAB>image_path<TAB>truth_path");
        ManifestEntry entry;
        entry.id = trim(text.substr(0, tab1));
        entry.image_path = manifest.root / trim(text.substr(tab1 + 1, tab2 - tab1 - 1));
        entry.truth_path = manifest.root / trim(text.substr(tab2 + 1));
        if (entry.id.empty()) throw Error("manifest line " + std::to_string(line_number) + ": empty id");
        if (!seen_ids.insert(entry.id).second)
            throw Error("manifest: duplicate id '" + entry.id + "'");
        if (!std::filesystem::exists(entry.image_path)) throw MissingFile(entry.image_path.string());
        if (!std::filesystem::exists(entry.truth_path)) throw MissingFile(entry.truth_path.string());
        manifest.entries.push_back(std::move(entry));
    }
    return manifest;
}

std::vector<LabeledImage> load_dataset(const std::filesystem::path& manifest_path) {
    const DatasetManifest manifest = read_manifest(manifest_path);
    std::vector<LabeledImage> out;
    out.reserve(manifest.entries.size());
    for (const ManifestEntry& entry : manifest.entries) {
        LabeledImage item;
        item.id = entry.id;
        item.image = io::load_rgb8(entry.image_path);
        item.truth = io::load_truth_mask(entry.truth_path);
        if (item.truth.width != item.image.width || item.truth.height != item.image.height)
            throw DimensionMismatch("entry '" + entry.id + "': image is " +
                                    std::to_string(item.image.width) + "x" +
                                    std::to_string(item.image.height) + " but truth is " +
                                    std::to_string(item.truth.width) + "x" +
                                    std::to_string(item.truth.height));
        out.push_back(std::move(item));
    }
    return out;
}

SynthResult generate_synthetic(const SynthSpec& spec) {
    if (spec.width < 16 || spec.height < 16) throw Error("synthetic dimensions must be >= 16");
    if (spec.noise_sigma < 0.0) throw Error("noise_sigma must be >= 0");

    Rng rng(spec.seed);
    const double cx = spec.center_x * spec.width;
    const double cy = spec.center_y * spec.height;
    const double r0 = spec.radius * std::min(spec.width, spec.height);
    // The noise table is drawn for both shapes to keep the pixel noise stream
    // independent of the shape choice.
    const AngularNoise boundary(rng, 10);

    auto in_cloud = [&](int x, int y) {
        const double dx = x - cx;
        const double dy = y - cy;
        const double dist = std::sqrt(dx * dx + dy * dy);
        if (spec.shape == CloudShape::Disk) return dist <= r0;
        double angle = std::atan2(dy, dx);
        if (angle < 0.0) angle += 2.0 * std::numbers::pi;
        return dist <= r0 * (1.0 + 0.35 * boundary.at(angle));
    };

    SynthResult result;
    result.image.width = spec.width;
    result.image.height = spec.height;
    result.image.rgb.resize(static_cast<size_t>(spec.width) * spec.height * 3);
    result.truth.width = spec.width;
    result.truth.height = spec.height;
    result.truth.labels.resize(static_cast<size_t>(spec.width) * spec.height);
    result.truth.provenance = "synthetic";

    for (int y = 0; y < spec.height; ++y) {
        const double t = (spec.height > 1) ? static_cast<double>(y) / (spec.height - 1) : 0.0;
        for (int x = 0; x < spec.width; ++x) {
            const int i = y * spec.width + x;
            const bool cloud = in_cloud(x, y);
            result.truth.labels[static_cast<size_t>(i)] = cloud ? 1 : 0;
            for (int c = 0; c < 3; ++c) {
                double base;
                if (cloud) {
                    base = spec.cloud_color[static_cast<size_t>(c)];
                } else {
                    base = spec.sky_top[static_cast<size_t>(c)] * (1.0 - t) +
                           spec.sky_bottom[static_cast<size_t>(c)] * t;
                }
                result.image.rgb[static_cast<size_t>(i) * 3 + static_cast<size_t>(c)] =
                    clamp_u8(base + spec.noise_sigma * rng.gaussian());
            }
        }
    }
    return result;
}

std::vector<SynthSpec> fixture_specs(int count, int width, int height, double max_noise_sigma,
                                     std::uint64_t master_seed) {
    if (count < 1) throw Error("fixture count must be >= 1");
    std::vector<SynthSpec> specs;
    specs.reserve(static_cast<size_t>(count));
    Rng rng(master_seed);
    const double min_sigma = std::min(4.0, max_noise_sigma);
    for (int i = 0; i < count; ++i) {
        SynthSpec spec;
        spec.width = width;
        spec.height = height;
        spec.shape = (i % 2 == 0) ? CloudShape::Disk : CloudShape::PerlinBlob;
        spec.seed = rng.next();
        spec.noise_sigma = min_sigma + (max_noise_sigma - min_sigma) * rng.uniform();
        spec.center_x = rng.uniform(0.3, 0.7);
        spec.center_y = rng.uniform(0.3, 0.7);
        spec.radius = rng.uniform(0.18, 0.32);
        const auto jitter = [&](std::uint8_t v, double amount) {
            return clamp_u8(v + rng.uniform(-amount, amount));
        };
        spec.sky_top = {jitter(spec.sky_top[0], 15), jitter(spec.sky_top[1], 15),
                        jitter(spec.sky_top[2], 12)};
        spec.sky_bottom = {jitter(spec.sky_bottom[0], 15), jitter(spec.sky_bottom[1], 15),
                           jitter(spec.sky_bottom[2], 12)};
        spec.cloud_color = {jitter(spec.cloud_color[0], 10), jitter(spec.cloud_color[1], 10),
                            jitter(spec.cloud_color[2], 10)};
        specs.push_back(spec);
    }
    return specs;
}

}  // namespace skycolor::dataset
