#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "skycolor/clustering.hpp"
#include "skycolor/types.hpp"

namespace skycolor::evaluation {

struct EvalScores {
    long long tp = 0, fp = 0, fn = 0, tn = 0;
    std::optional<double> precision;  // tp / (tp + fp), absent when no predicted positives
    std::optional<double> recall;     // tp / (tp + fn), absent when no truth positives
    std::optional<double> fscore;     // 2PR / (P + R), absent when P + R = 0 or either undefined
};

// Confusion counts with cloud as the positive class.
EvalScores score(const SegmentationMask& mask, const SegmentationMask& truth);

struct AggregateScores {
    int image_count = 0;
    // Unweighted means over images where the ratio is defined (headline numbers).
    std::optional<double> mean_precision, mean_recall, mean_fscore;
    int excluded_precision = 0, excluded_recall = 0, excluded_fscore = 0;
    // Counts pooled over all pixels of all images.
    EvalScores pooled;
};

AggregateScores aggregate(std::span<const EvalScores> per_image);

enum class LabelingMode { Oracle, Heuristic };

struct SweepOptions {
    clustering::FcmConfig fcm;
    LabelingMode labeling = LabelingMode::Oracle;
    int workers = 1;
};

struct SweepCell {
    Channel a = Channel::R;
    Channel b = Channel::R;  // b == a for 1D cells
    AggregateScores scores;
    std::string status = "ok";

    bool ok() const { return status == "ok"; }
    bool is_1d() const { return a == b; }
};

struct SweepGrid {
    std::vector<SweepCell> cells;  // 136 cells, ordered by (a, b) with a <= b

    const SweepCell& cell(Channel a, Channel b) const;  // symmetric lookup
    std::string to_csv() const;  // channel_a,channel_b,precision,recall,fscore,status
    // 16x16 mean F-score matrix, mirrored; failed cells read 0.
    std::array<std::array<double, kChannelCount>, kChannelCount> fscore_matrix() const;
    // Mean 1D F-score per channel in channel order; absent for failed/undefined cells.
    std::array<std::optional<double>, kChannelCount> fscores_1d() const;
};

// Clusters and scores every single channel and channel pair. Cell order and
// per-cell arithmetic are worker-count independent.
SweepGrid sweep(std::span<const ChannelStack> stacks, std::span<const SegmentationMask> truths,
                const SweepOptions& options);

// Reference scores of an external algorithm, for report annotation only.
struct ReferenceRow {
    std::string name;
    double precision = 0.0, recall = 0.0, fscore = 0.0;
};
std::vector<ReferenceRow> read_reference_rows(const std::filesystem::path& path);

std::string leaderboard(const SweepGrid& grid, std::span<const ReferenceRow> reference = {},
                        std::optional<double> loading_fit_r2 = std::nullopt);

// R^2 of the ordinary least-squares fit of F-score on |loading|.
double loading_fit(std::span<const double> loadings_pc1, std::span<const double> fscores_1d);

}  // namespace skycolor::evaluation
