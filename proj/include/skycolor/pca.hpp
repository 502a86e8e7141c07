#pragma once

#include <span>
#include <string>
#include <vector>

#include "skycolor/types.hpp"

namespace skycolor::pca {

using Matrix = std::array<std::array<double, kChannelCount>, kChannelCount>;

struct NormalizationParams {
    std::array<double, kChannelCount> mean{};
    std::array<double, kChannelCount> stddev{};  // population, > 0
};

// Pooled per-channel mean/stddev over all pixels of all stacks.
// Throws DegenerateChannel for any constant channel.
NormalizationParams fit_normalization(std::span<const ChannelStack> stacks);

// Column j mapped to (c_j - mean[j]) / stddev[j]; shape and id preserved.
ChannelStack normalize(const ChannelStack& stack, const NormalizationParams& params);

// Population covariance of the 16 columns. Throws TooFewRows for < 2 rows.
Matrix covariance(const ChannelStack& stack);

// Pools rows across stacks; merge order is the add() order, with compensated
// sums so permuting whole images does not change the collapsed result.
class CovarianceAccumulator {
public:
    void add(const ChannelStack& stack);
    long long rows() const { return n_; }
    Matrix covariance() const;  // TooFewRows when fewer than 2 rows pooled

private:
    long long n_ = 0;
    std::array<double, kChannelCount> sum_hi_{}, sum_lo_{};
    std::array<std::array<double, kChannelCount>, kChannelCount> cross_hi_{}, cross_lo_{};
};

enum class LoadingMode { Scaled, Raw };

struct PcaResult {
    std::array<double, kChannelCount> eigenvalues{};  // descending, clamped at 0
    Matrix eigenvectors{};                            // column p = p-th eigenvector
    std::array<double, kChannelCount> variance_fraction{};
    Matrix loadings{};                                // loadings[j][p], channel j on component p
};

// Full spectral decomposition by cyclic Jacobi rotations. Eigenvectors are
// oriented so the largest-magnitude entry is positive (ties: lowest index).
PcaResult eigendecompose(const Matrix& m, LoadingMode mode = LoadingMode::Scaled);

// loadings[j][p] = e_p[j] * sqrt(lambda_p) in Scaled mode, e_p[j] in Raw mode.
Matrix loading_factors(const PcaResult& result, LoadingMode mode = LoadingMode::Scaled);

// Squared first-component loadings of the pair; symmetric in (a, b).
double pair_cumulative_loading(const PcaResult& result, Channel a, Channel b);

// Triangle area spanned by the pair's projections on the PC1/PC2 plane.
double pair_projection_area(const PcaResult& result, Channel a, Channel b);

// Full 16x16 area grid; symmetric, zero diagonal.
Matrix projection_area_grid(const PcaResult& result);

struct VarianceReport {
    std::vector<std::string> image_ids;
    std::vector<std::array<double, kChannelCount>> per_image;  // variance fractions
    std::array<double, kChannelCount> whole_database{};
};

// Variance fractions of each image's covariance plus the covariance of all
// images' rows pooled. Stacks are normalized with `params` internally.
VarianceReport variance_report(std::span<const ChannelStack> stacks,
                               const NormalizationParams& params, int workers = 1);

std::string to_csv(const PcaResult& result);          // component,eigenvalue,variance_fraction
std::string loadings_csv(const PcaResult& result);    // channel,pc1..pc16
std::string area_grid_csv(const Matrix& grid);        // channel,c1..c16 matrix form
std::string variance_csv(const VarianceReport& rep);  // image,pc1..pc16

}  // namespace skycolor::pca
