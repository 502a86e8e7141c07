#pragma once

#include <span>
#include <string>
#include <vector>

#include "skycolor/types.hpp"

namespace skycolor::stats {

// Compensated (two-sum) running sum. Keeps the rounding residual in a second
// double so merged and permuted accumulations collapse to the same result.
struct CompensatedSum {
    double hi = 0.0;
    double lo = 0.0;

    void add(double x);
    void add(const CompensatedSum& other);
    double value() const { return hi + lo; }
};

// Population central moments of one sample sequence. Pairwise merge is
// written in difference form, so every correction term vanishes bitwise when
// the merged parts have identical statistics: pooling k copies of a stack
// reproduces the single-stack moments exactly.
struct MomentSummary {
    long long n = 0;
    double mean = 0.0;
    double m2 = 0.0;  // population central moments
    double m3 = 0.0;
    double m4 = 0.0;

    void merge(const MomentSummary& other);
    bool degenerate() const { return n < 2 || !(m2 > 0.0); }
    double stddev() const;
    double skewness() const;  // throws DegenerateDistribution
    double kurtosis() const;  // non-excess
    double pbi() const;
};

// One-pass central-moment accumulator: power sums of (x - shift) with the
// shift anchored at the first sample. Mergeable; merging rebases the other
// accumulator's sums onto this shift.
class MomentAccumulator {
public:
    void add(double x);
    void merge(const MomentAccumulator& other);
    MomentSummary summary() const;

    long long count() const { return n_; }
    double mean() const;
    double variance() const;  // population (divide by n)
    double stddev() const;
    double skewness() const;  // m3 / m2^1.5, throws DegenerateDistribution
    double kurtosis() const;  // non-excess m4 / m2^2, throws DegenerateDistribution
    double pbi() const;       // kurtosis - skewness^2
    bool degenerate() const;  // n < 2 or zero variance

private:
    std::array<double, 4> central_moments() const;  // m1(shifted), m2, m3, m4

    long long n_ = 0;
    double shift_ = 0.0;
    CompensatedSum s1_, s2_, s3_, s4_;
};

double skewness(std::span<const double> samples);
double kurtosis(std::span<const double> samples);
double pbi(std::span<const double> samples);

struct ChannelMoments {
    Channel channel = Channel::R;
    long long n = 0;
    double mean = 0.0;
    double stddev = 0.0;
    double skewness = 0.0;
    double kurtosis = 0.0;
    double pbi = 0.0;
    bool degenerate = false;
};

struct PbiReport {
    // Sorted ascending by PBI (most bimodal first); degenerate channels last.
    std::vector<ChannelMoments> entries;

    std::string to_csv() const;  // header: channel,n,mean,stddev,skewness,kurtosis,pbi
};

// PBI of each channel over the concatenation of all stacks' columns.
// Degenerate channels are flagged in place, never thrown.
PbiReport dataset_pbi(std::span<const ChannelStack> stacks);

}  // namespace skycolor::stats
