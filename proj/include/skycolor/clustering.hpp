#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "skycolor/types.hpp"

namespace skycolor::clustering {

inline constexpr int kClusters = 2;

struct FcmConfig {
    double fuzziness = 2.0;   // tau > 1
    int max_iterations = 300;
    double tolerance = 1e-5;  // max absolute membership change
    std::uint64_t seed = 0;   // reserved for randomized fallbacks; part of the config hash

    // Test hook: explicit initial centers (kClusters * dims values). Empty
    // selects the deterministic percentile initialization.
    std::vector<double> initial_centers;
};

struct FeatureMatrix {
    int rows = 0;
    int dims = 0;                // 1 or 2
    std::vector<double> values;  // rows x dims, row-major

    double at(int row, int d) const { return values[static_cast<size_t>(row) * dims + d]; }
};

struct FcmOutput {
    int dims = 0;
    std::array<std::array<double, 2>, kClusters> centers{};  // [cluster][dim]
    std::vector<double> memberships;                         // rows x 2, row-major
    int iterations_used = 0;
    double final_objective = 0.0;

    double membership(int row, int cluster) const {
        return memberships[static_cast<size_t>(row) * kClusters + cluster];
    }
};

// Called once per iteration with the objective for the just-updated
// memberships against the centers they were computed from.
using IterationObserver = std::function<void(int iteration, double objective,
                                             std::span<const double> memberships)>;

// Alternating optimization of the fuzzy 2-means objective
// J = sum_r sum_s p_r(x_s)^tau * ||x_s - v_r||^2.
FcmOutput fcm(const FeatureMatrix& features, const FcmConfig& config,
              const IterationObserver& observer = {});

struct ClusterLabeling {
    int cloud_cluster = 0;
};

std::vector<double> cloud_memberships(const FcmOutput& output, ClusterLabeling labeling);

// Cloud iff probability > 0.5 (exactly 0.5 stays sky).
SegmentationMask threshold_mask(std::span<const double> cloud_probability, int width, int height);

// Selected channel columns of a stack, in the given channel order.
FeatureMatrix select_features(const ChannelStack& stack, std::span<const Channel> channels);

// In-place per-column zero-mean/unit-variance; constant columns become zeros.
void standardize_columns(FeatureMatrix& features);

// select -> standardize -> fcm.
FcmOutput cluster_channels(const ChannelStack& stack, std::span<const Channel> channels,
                           const FcmConfig& config);

// Cloud is the cluster with the higher membership-weighted mean R/B (c13);
// clouds are near-neutral while sky is blue-dominant.
ClusterLabeling heuristic_labeling(const ChannelStack& stack, const FcmOutput& output);

SegmentationMask mask_from_output(const FcmOutput& output, ClusterLabeling labeling, int width,
                                  int height, std::string provenance = {});

// Full pipeline with a resolved labeling.
SegmentationMask segment(const ChannelStack& stack, std::span<const Channel> channels,
                         const FcmConfig& config, ClusterLabeling labeling);

std::string provenance_string(std::span<const Channel> channels, const FcmConfig& config,
                              ClusterLabeling labeling);

}  // namespace skycolor::clustering
