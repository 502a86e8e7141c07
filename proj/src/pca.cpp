#include "skycolor/pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "skycolor/csv.hpp"
#include "skycolor/parallel.hpp"
#include "skycolor/stats.hpp"

namespace skycolor::pca {

namespace {

constexpr int N = kChannelCount;

inline void comp_add(double& hi, double& lo, double x) {
    const double s = hi + x;
    const double bv = s - hi;
    lo += (hi - (s - bv)) + (x - bv);
    hi = s;
}

double off_diagonal_norm(const Matrix& a) {
    double sum = 0.0;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            if (i != j) sum += a[i][j] * a[i][j];
    return std::sqrt(sum);
}

// Cyclic Jacobi sweeps; stops when the off-diagonal Frobenius norm < 1e-12.
void jacobi(Matrix a, std::array<double, N>& eigenvalues, Matrix& vectors) {
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) vectors[i][j] = (i == j) ? 1.0 : 0.0;

    const int max_sweeps = 64;
    for (int sweep = 0; sweep < max_sweeps && off_diagonal_norm(a) >= 1e-12; ++sweep) {
        for (int p = 0; p < N - 1; ++p) {
            for (int q = p + 1; q < N; ++q) {
                if (a[p][q] == 0.0) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                if (theta < 0.0) t = -t;
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                const double app = a[p][p], aqq = a[q][q], apq = a[p][q];
                a[p][p] = app - t * apq;
                a[q][q] = aqq + t * apq;
                a[p][q] = a[q][p] = 0.0;
                for (int k = 0; k < N; ++k) {
                    if (k == p || k == q) continue;
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = a[p][k] = c * akp - s * akq;
                    a[k][q] = a[q][k] = s * akp + c * akq;
                }
                for (int k = 0; k < N; ++k) {
                    const double vkp = vectors[k][p], vkq = vectors[k][q];
                    vectors[k][p] = c * vkp - s * vkq;
                    vectors[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    for (int i = 0; i < N; ++i) eigenvalues[i] = a[i][i];
}

}  // namespace

NormalizationParams fit_normalization(std::span<const ChannelStack> stacks) {
    long long total = 0;
    for (const ChannelStack& s : stacks) total += s.rows();
    if (total < 2) throw Error("fit_normalization: need at least 2 pixels");

    std::array<double, N> s1_hi{}, s1_lo{}, s2_hi{}, s2_lo{};
    for (const ChannelStack& stack : stacks) {
        for (int p = 0; p < stack.rows(); ++p) {
            for (int j = 0; j < N; ++j) {
                const double x = stack.at(p, j);
                comp_add(s1_hi[j], s1_lo[j], x);
                comp_add(s2_hi[j], s2_lo[j], x * x);
            }
        }
    }

    NormalizationParams params;
    const double n = static_cast<double>(total);
    for (int j = 0; j < N; ++j) {
        const double mean = (s1_hi[j] + s1_lo[j]) / n;
        const double var = (s2_hi[j] + s2_lo[j]) / n - mean * mean;
        if (!(var > 0.0)) throw DegenerateChannel(j);
        params.mean[j] = mean;
        params.stddev[j] = std::sqrt(var);
    }
    return params;
}

ChannelStack normalize(const ChannelStack& stack, const NormalizationParams& params) {
    ChannelStack out = stack;
    for (int p = 0; p < out.rows(); ++p)
        for (int j = 0; j < N; ++j)
            out.at(p, j) = (stack.at(p, j) - params.mean[j]) / params.stddev[j];
    return out;
}

void CovarianceAccumulator::add(const ChannelStack& stack) {
    std::array<double, N> sum{};
    std::array<std::array<double, N>, N> cross{};
    for (int p = 0; p < stack.rows(); ++p) {
        const double* row = stack.values.data() + static_cast<size_t>(p) * N;
        for (int j = 0; j < N; ++j) {
            sum[j] += row[j];
            for (int k = j; k < N; ++k) cross[j][k] += row[j] * row[k];
        }
    }
    for (int j = 0; j < N; ++j) {
        comp_add(sum_hi_[j], sum_lo_[j], sum[j]);
        for (int k = j; k < N; ++k) comp_add(cross_hi_[j][k], cross_lo_[j][k], cross[j][k]);
    }
    n_ += stack.rows();
}

Matrix CovarianceAccumulator::covariance() const {
    if (n_ < 2) throw TooFewRows();
    const double n = static_cast<double>(n_);
    std::array<double, N> mean;
    for (int j = 0; j < N; ++j) mean[j] = (sum_hi_[j] + sum_lo_[j]) / n;
    Matrix cov;
    for (int j = 0; j < N; ++j) {
        for (int k = j; k < N; ++k) {
            const double c = (cross_hi_[j][k] + cross_lo_[j][k]) / n - mean[j] * mean[k];
            cov[j][k] = cov[k][j] = c;
        }
    }
    return cov;
}

Matrix covariance(const ChannelStack& stack) {
    if (stack.rows() < 2) throw TooFewRows();
    CovarianceAccumulator acc;
    acc.add(stack);
    return acc.covariance();
}

PcaResult eigendecompose(const Matrix& m, LoadingMode mode) {
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j)
            if (std::abs(m[i][j] - m[j][i]) > 1e-10) throw NotSymmetric();

    PcaResult result;
    std::array<double, N> raw_values;
    Matrix raw_vectors;
    jacobi(m, raw_values, raw_vectors);

    std::array<int, N> order;
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return raw_values[a] > raw_values[b]; });

    double trace_sum = 0.0;
    for (int p = 0; p < N; ++p) {
        double lambda = raw_values[order[p]];
        if (lambda < 0.0) {
            if (lambda < -1e-9) throw Error("matrix is not positive semidefinite");
            lambda = 0.0;
        }
        result.eigenvalues[p] = lambda;
        trace_sum += lambda;

        // Deterministic sign: largest-magnitude entry positive, lowest index on ties.
        int imax = 0;
        double amax = -1.0;
        for (int j = 0; j < N; ++j) {
            const double mag = std::abs(raw_vectors[j][order[p]]);
            if (mag > amax) {
                amax = mag;
                imax = j;
            }
        }
        const double flip = (raw_vectors[imax][order[p]] < 0.0) ? -1.0 : 1.0;
        for (int j = 0; j < N; ++j) result.eigenvectors[j][p] = flip * raw_vectors[j][order[p]];
    }

    if (trace_sum <= 0.0) throw Error("covariance has zero total variance");
    for (int p = 0; p < N; ++p) result.variance_fraction[p] = result.eigenvalues[p] / trace_sum;
    result.loadings = loading_factors(result, mode);
    return result;
}

Matrix loading_factors(const PcaResult& result, LoadingMode mode) {
    Matrix loadings;
    for (int p = 0; p < N; ++p) {
        const double scale = (mode == LoadingMode::Scaled) ? std::sqrt(result.eigenvalues[p]) : 1.0;
        for (int j = 0; j < N; ++j) loadings[j][p] = result.eigenvectors[j][p] * scale;
    }
    return loadings;
}

double pair_cumulative_loading(const PcaResult& result, Channel a, Channel b) {
    if (a == b) throw SameChannel();
    const double la = result.loadings[channel_index(a)][0];
    const double lb = result.loadings[channel_index(b)][0];
    return la * la + lb * lb;
}

double pair_projection_area(const PcaResult& result, Channel a, Channel b) {
    if (a == b) throw SameChannel();
    const int ia = channel_index(a), ib = channel_index(b);
    const double ax = result.loadings[ia][0], ay = result.loadings[ia][1];
    const double bx = result.loadings[ib][0], by = result.loadings[ib][1];
    return 0.5 * std::abs(ax * by - ay * bx);
}

Matrix projection_area_grid(const PcaResult& result) {
    Matrix grid{};
    for (int a = 0; a < N; ++a) {
        grid[a][a] = 0.0;
        for (int b = a + 1; b < N; ++b) {
            const double area =
                pair_projection_area(result, channel_from_index(a), channel_from_index(b));
            grid[a][b] = grid[b][a] = area;
        }
    }
    return grid;
}

VarianceReport variance_report(std::span<const ChannelStack> stacks,
                               const NormalizationParams& params, int workers) {
    VarianceReport report;
    report.image_ids.resize(stacks.size());
    report.per_image.resize(stacks.size());

    std::vector<ChannelStack> normalized(stacks.size());
    parallel_for(static_cast<int>(stacks.size()), workers, [&](int i) {
        normalized[i] = normalize(stacks[i], params);
        report.image_ids[i] = stacks[i].image_id;
        report.per_image[i] = eigendecompose(covariance(normalized[i])).variance_fraction;
    });

    CovarianceAccumulator pooled;
    for (const ChannelStack& s : normalized) pooled.add(s);
    report.whole_database = eigendecompose(pooled.covariance()).variance_fraction;
    return report;
}

std::string to_csv(const PcaResult& result) {
    std::string out = "component,eigenvalue,variance_fraction\n";
    for (int p = 0; p < N; ++p) {
        out += "pc" + std::to_string(p + 1) + ',' + csv::fmt(result.eigenvalues[p]) + ',' +
               csv::fmt(result.variance_fraction[p]) + '\n';
    }
    return out;
}

std::string loadings_csv(const PcaResult& result) {
    std::string out = "channel";
    for (int p = 0; p < N; ++p) out += ",pc" + std::to_string(p + 1);
    out += '\n';
    for (int j = 0; j < N; ++j) {
        out += std::string(channel_code(channel_from_index(j)));
        for (int p = 0; p < N; ++p) {
            out += ',';
            out += csv::fmt(result.loadings[j][p]);
        }
        out += '\n';
    }
    return out;
}

std::string area_grid_csv(const Matrix& grid) {
    std::string out = "channel";
    for (int j = 0; j < N; ++j) out += ',' + std::string(channel_code(channel_from_index(j)));
    out += '\n';
    for (int a = 0; a < N; ++a) {
        out += std::string(channel_code(channel_from_index(a)));
        for (int b = 0; b < N; ++b) {
            out += ',';
            out += csv::fmt(grid[a][b]);
        }
        out += '\n';
    }
    return out;
}

std::string variance_csv(const VarianceReport& rep) {
    std::string out = "image";
    for (int p = 0; p < N; ++p) out += ",pc" + std::to_string(p + 1);
    out += '\n';
    for (size_t i = 0; i < rep.per_image.size(); ++i) {
        out += rep.image_ids[i];
        for (int p = 0; p < N; ++p) {
            out += ',';
            out += csv::fmt(rep.per_image[i][p]);
        }
        out += '\n';
    }
    out += "database";
    for (int p = 0; p < N; ++p) {
        out += ',';
        out += csv::fmt(rep.whole_database[p]);
    }
    out += '\n';
    return out;
}

}  // namespace skycolor::pca
