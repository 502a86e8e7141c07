#include "skycolor/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace skycolor::clustering {

namespace {

void validate(const FcmConfig& config, int dims) {
    if (!(config.fuzziness > 1.0)) throw Error("fuzziness must be > 1");
    if (!(config.tolerance > 0.0)) throw Error("tolerance must be > 0");
    if (config.max_iterations < 1) throw Error("max_iterations must be >= 1");
    if (!config.initial_centers.empty() &&
        config.initial_centers.size() != static_cast<size_t>(kClusters * dims))
        throw Error("initial_centers must hold 2 x dims values");
}

double quantile(std::vector<double> sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const size_t lo = static_cast<size_t>(pos);
    const size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

std::vector<double> column(const FeatureMatrix& f, int d) {
    std::vector<double> col(static_cast<size_t>(f.rows));
    for (int s = 0; s < f.rows; ++s) col[static_cast<size_t>(s)] = f.at(s, d);
    return col;
}

// Deterministic initialization: centers at the 10th/90th percentiles of the
// first feature; the second feature starts at the conditional means of rows
// below/above the first feature's median. Falls back to min/max (then to the
// other dimension) when the percentiles coincide.
std::array<std::array<double, 2>, kClusters> initial_centers(const FeatureMatrix& f) {
    std::array<std::array<double, 2>, kClusters> centers{};
    int split_dim = 0;
    double lo = 0.0, hi = 0.0;
    for (int d = 0; d < f.dims; ++d) {
        std::vector<double> col = column(f, d);
        std::sort(col.begin(), col.end());
        lo = quantile(col, 0.10);
        hi = quantile(col, 0.90);
        if (lo == hi) {
            lo = col.front();
            hi = col.back();
        }
        if (lo != hi) {
            split_dim = d;
            break;
        }
    }
    centers[0][split_dim] = lo;
    centers[1][split_dim] = hi;

    if (f.dims == 2) {
        const int other = 1 - split_dim;
        std::vector<double> col = column(f, split_dim);
        std::sort(col.begin(), col.end());
        const double median = quantile(col, 0.5);
        double below_sum = 0.0, above_sum = 0.0, total = 0.0;
        long long below_n = 0, above_n = 0;
        for (int s = 0; s < f.rows; ++s) {
            const double v = f.at(s, other);
            total += v;
            if (f.at(s, split_dim) < median) {
                below_sum += v;
                ++below_n;
            } else {
                above_sum += v;
                ++above_n;
            }
        }
        const double overall = total / static_cast<double>(f.rows);
        centers[0][other] = below_n > 0 ? below_sum / static_cast<double>(below_n) : overall;
        centers[1][other] = above_n > 0 ? above_sum / static_cast<double>(above_n) : overall;
    }
    return centers;
}

struct PassResult {
    double objective = 0.0;
    double max_delta = 0.0;
    std::array<double, kClusters> weight_sum{};
    std::array<std::array<double, 2>, kClusters> weighted_sum{};
};

// One membership update against fixed centers, accumulating the objective
// J(p, v) and the center-update sums. D = dims, Tau2 = tau == 2 fast path.
template <int D, bool Tau2>
PassResult membership_pass(const FeatureMatrix& f,
                           const std::array<std::array<double, 2>, kClusters>& centers,
                           double tau, std::vector<double>& memberships) {
    PassResult r;
    const double exponent = 1.0 / (tau - 1.0);
    const double* values = f.values.data();
    for (int s = 0; s < f.rows; ++s) {
        const double* x = values + static_cast<size_t>(s) * D;
        std::array<double, kClusters> dist2;
        for (int c = 0; c < kClusters; ++c) {
            double sum = 0.0;
            for (int d = 0; d < D; ++d) {
                const double diff = x[d] - centers[c][d];
                sum += diff * diff;
            }
            dist2[c] = sum;
        }

        double p0, p1;
        if (dist2[0] <= 0.0 && dist2[1] <= 0.0) {
            p0 = p1 = 0.5;
        } else if (dist2[0] <= 0.0) {
            p0 = 1.0;
            p1 = 0.0;
        } else if (dist2[1] <= 0.0) {
            p0 = 0.0;
            p1 = 1.0;
        } else {
            const double dmin = std::min(dist2[0], dist2[1]);
            double q0, q1;
            if constexpr (Tau2) {
                q0 = dmin / dist2[0];
                q1 = dmin / dist2[1];
            } else {
                q0 = std::pow(dmin / dist2[0], exponent);
                q1 = std::pow(dmin / dist2[1], exponent);
            }
            const double total = q0 + q1;
            p0 = q0 / total;
            p1 = q1 / total;
        }

        double* m = memberships.data() + static_cast<size_t>(s) * kClusters;
        r.max_delta = std::max({r.max_delta, std::abs(p0 - m[0]), std::abs(p1 - m[1])});
        m[0] = p0;
        m[1] = p1;

        const double w0 = Tau2 ? p0 * p0 : std::pow(p0, tau);
        const double w1 = Tau2 ? p1 * p1 : std::pow(p1, tau);
        r.objective += w0 * dist2[0] + w1 * dist2[1];
        r.weight_sum[0] += w0;
        r.weight_sum[1] += w1;
        for (int d = 0; d < D; ++d) {
            r.weighted_sum[0][d] += w0 * x[d];
            r.weighted_sum[1][d] += w1 * x[d];
        }
    }
    return r;
}

PassResult run_pass(const FeatureMatrix& f,
                    const std::array<std::array<double, 2>, kClusters>& centers, double tau,
                    std::vector<double>& memberships) {
    const bool tau2 = (tau == 2.0);
    if (f.dims == 1)
        return tau2 ? membership_pass<1, true>(f, centers, tau, memberships)
                    : membership_pass<1, false>(f, centers, tau, memberships);
    return tau2 ? membership_pass<2, true>(f, centers, tau, memberships)
                : membership_pass<2, false>(f, centers, tau, memberships);
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace

FcmOutput fcm(const FeatureMatrix& features, const FcmConfig& config,
              const IterationObserver& observer) {
    if (features.dims != 1 && features.dims != 2) throw Error("feature dims must be 1 or 2");
    validate(config, features.dims);
    if (features.rows < 2) throw DegenerateInput("need at least 2 feature rows");

    bool all_identical = true;
    for (int s = 1; s < features.rows && all_identical; ++s)
        for (int d = 0; d < features.dims; ++d)
            if (features.at(s, d) != features.at(0, d)) {
                all_identical = false;
                break;
            }
    if (all_identical) throw DegenerateInput();

    FcmOutput out;
    out.dims = features.dims;
    out.memberships.assign(static_cast<size_t>(features.rows) * kClusters, 0.0);
    if (config.initial_centers.empty()) {
        out.centers = initial_centers(features);
    } else {
        for (int c = 0; c < kClusters; ++c)
            for (int d = 0; d < features.dims; ++d)
                out.centers[c][d] = config.initial_centers[static_cast<size_t>(c) * features.dims + d];
    }

    for (int iter = 1; iter <= config.max_iterations; ++iter) {
        const PassResult pass = run_pass(features, out.centers, config.fuzziness, out.memberships);
        if (!std::isfinite(pass.objective)) throw NonFinite();
        out.iterations_used = iter;
        out.final_objective = pass.objective;
        if (observer) observer(iter, pass.objective, out.memberships);
        if (iter > 1 && pass.max_delta < config.tolerance) break;
        for (int c = 0; c < kClusters; ++c) {
            if (pass.weight_sum[c] <= 0.0) continue;  // empty cluster keeps its center
            for (int d = 0; d < features.dims; ++d)
                out.centers[c][d] = pass.weighted_sum[c][d] / pass.weight_sum[c];
        }
    }
    return out;
}

std::vector<double> cloud_memberships(const FcmOutput& output, ClusterLabeling labeling) {
    const size_t rows = output.memberships.size() / kClusters;
    std::vector<double> probs(rows);
    for (size_t s = 0; s < rows; ++s)
        probs[s] = output.memberships[s * kClusters + labeling.cloud_cluster];
    return probs;
}

SegmentationMask threshold_mask(std::span<const double> cloud_probability, int width, int height) {
    if (cloud_probability.size() != static_cast<size_t>(width) * height)
        throw ShapeMismatch("probability count does not match width x height");
    SegmentationMask mask;
    mask.width = width;
    mask.height = height;
    mask.labels.resize(cloud_probability.size());
    for (size_t i = 0; i < cloud_probability.size(); ++i)
        mask.labels[i] = cloud_probability[i] > 0.5 ? 1 : 0;
    return mask;
}

FeatureMatrix select_features(const ChannelStack& stack, std::span<const Channel> channels) {
    if (channels.empty() || channels.size() > 2) throw Error("select 1 or 2 channels");
    if (channels.size() == 2 && channels[0] == channels[1]) throw SameChannel();
    FeatureMatrix f;
    f.rows = stack.rows();
    f.dims = static_cast<int>(channels.size());
    f.values.resize(static_cast<size_t>(f.rows) * f.dims);
    for (int s = 0; s < f.rows; ++s)
        for (int d = 0; d < f.dims; ++d)
            f.values[static_cast<size_t>(s) * f.dims + d] = stack.at(s, channels[d]);
    return f;
}

void standardize_columns(FeatureMatrix& features) {
    for (int d = 0; d < features.dims; ++d) {
        double sum = 0.0;
        for (int s = 0; s < features.rows; ++s) sum += features.at(s, d);
        const double mean = sum / static_cast<double>(features.rows);
        double sq = 0.0;
        for (int s = 0; s < features.rows; ++s) {
            const double diff = features.at(s, d) - mean;
            sq += diff * diff;
        }
        const double var = sq / static_cast<double>(features.rows);
        const double scale = var > 0.0 ? 1.0 / std::sqrt(var) : 0.0;
        for (int s = 0; s < features.rows; ++s) {
            double& v = features.values[static_cast<size_t>(s) * features.dims + d];
            v = (v - mean) * scale;
        }
    }
}

FcmOutput cluster_channels(const ChannelStack& stack, std::span<const Channel> channels,
                           const FcmConfig& config) {
    FeatureMatrix features = select_features(stack, channels);
    standardize_columns(features);
    return fcm(features, config);
}

ClusterLabeling heuristic_labeling(const ChannelStack& stack, const FcmOutput& output) {
    std::array<double, kClusters> weighted{}, weights{};
    for (int s = 0; s < stack.rows(); ++s) {
        const double ratio_rb = stack.at(s, Channel::RatioRB);
        for (int c = 0; c < kClusters; ++c) {
            const double u = output.membership(s, c);
            weighted[c] += u * ratio_rb;
            weights[c] += u;
        }
    }
    const double mean0 = weights[0] > 0.0 ? weighted[0] / weights[0] : 0.0;
    const double mean1 = weights[1] > 0.0 ? weighted[1] / weights[1] : 0.0;
    return {mean1 > mean0 ? 1 : 0};
}

SegmentationMask mask_from_output(const FcmOutput& output, ClusterLabeling labeling, int width,
                                  int height, std::string provenance) {
    const std::vector<double> probs = cloud_memberships(output, labeling);
    SegmentationMask mask = threshold_mask(probs, width, height);
    mask.provenance = std::move(provenance);
    return mask;
}

SegmentationMask segment(const ChannelStack& stack, std::span<const Channel> channels,
                         const FcmConfig& config, ClusterLabeling labeling) {
    const FcmOutput output = cluster_channels(stack, channels, config);
    return mask_from_output(output, labeling, stack.width, stack.height,
                            provenance_string(channels, config, labeling));
}

std::string provenance_string(std::span<const Channel> channels, const FcmConfig& config,
                              ClusterLabeling labeling) {
    std::string ch;
    for (size_t i = 0; i < channels.size(); ++i) {
        if (i) ch += '+';
        ch += channel_code(channels[i]);
    }
    char cfg[128];
    std::snprintf(cfg, sizeof(cfg), "tau=%.9g;max_iter=%d;tol=%.9g;seed=%llu", config.fuzziness,
                  config.max_iterations, config.tolerance,
                  static_cast<unsigned long long>(config.seed));
    char buf[224];
    std::snprintf(buf, sizeof(buf), "channels=%s;config=%016llx;cloud=%d", ch.c_str(),
                  static_cast<unsigned long long>(fnv1a(cfg)), labeling.cloud_cluster);
    return buf;
}

}  // namespace skycolor::clustering
