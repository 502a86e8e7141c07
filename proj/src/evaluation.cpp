#include "skycolor/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "skycolor/csv.hpp"
#include "skycolor/parallel.hpp"

namespace skycolor::evaluation {

namespace {

void fill_ratios(EvalScores& s) {
    if (s.tp + s.fp > 0)
        s.precision = static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fp);
    if (s.tp + s.fn > 0) s.recall = static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fn);
    if (s.precision && s.recall && (*s.precision + *s.recall) > 0.0)
        s.fscore = 2.0 * *s.precision * *s.recall / (*s.precision + *s.recall);
}

}  // namespace

EvalScores score(const SegmentationMask& mask, const SegmentationMask& truth) {
    if (mask.width != truth.width || mask.height != truth.height)
        throw ShapeMismatch("mask and truth dimensions differ");
    EvalScores s;
    for (int i = 0; i < mask.pixel_count(); ++i) {
        const bool predicted = mask.cloud(i);
        const bool actual = truth.cloud(i);
        if (predicted && actual)
            ++s.tp;
        else if (predicted && !actual)
            ++s.fp;
        else if (!predicted && actual)
            ++s.fn;
        else
            ++s.tn;
    }
    fill_ratios(s);
    return s;
}

AggregateScores aggregate(std::span<const EvalScores> per_image) {
    AggregateScores agg;
    agg.image_count = static_cast<int>(per_image.size());
    double psum = 0.0, rsum = 0.0, fsum = 0.0;
    int pn = 0, rn = 0, fn_count = 0;
    for (const EvalScores& s : per_image) {
        agg.pooled.tp += s.tp;
        agg.pooled.fp += s.fp;
        agg.pooled.fn += s.fn;
        agg.pooled.tn += s.tn;
        if (s.precision) {
            psum += *s.precision;
            ++pn;
        } else {
            ++agg.excluded_precision;
        }
        if (s.recall) {
            rsum += *s.recall;
            ++rn;
        } else {
            ++agg.excluded_recall;
        }
        if (s.fscore) {
            fsum += *s.fscore;
            ++fn_count;
        } else {
            ++agg.excluded_fscore;
        }
    }
    if (pn > 0) agg.mean_precision = psum / pn;
    if (rn > 0) agg.mean_recall = rsum / rn;
    if (fn_count > 0) agg.mean_fscore = fsum / fn_count;
    fill_ratios(agg.pooled);
    return agg;
}

namespace {

struct CellJob {
    Channel a, b;
};

std::vector<CellJob> cell_jobs() {
    std::vector<CellJob> jobs;
    jobs.reserve(kChannelCount * (kChannelCount + 1) / 2);
    for (int a = 0; a < kChannelCount; ++a)
        for (int b = a; b < kChannelCount; ++b)
            jobs.push_back({channel_from_index(a), channel_from_index(b)});
    return jobs;
}

double fscore_or_zero(const EvalScores& s) { return s.fscore.value_or(0.0); }

SweepCell run_cell(const CellJob& job, std::span<const ChannelStack> stacks,
                   std::span<const SegmentationMask> truths, const SweepOptions& options) {
    SweepCell cell;
    cell.a = job.a;
    cell.b = job.b;
    std::vector<Channel> channels{job.a};
    if (job.b != job.a) channels.push_back(job.b);

    std::vector<EvalScores> per_image;
    per_image.reserve(stacks.size());
    try {
        for (size_t i = 0; i < stacks.size(); ++i) {
            const ChannelStack& stack = stacks[i];
            const clustering::FcmOutput output =
                clustering::cluster_channels(stack, channels, options.fcm);
            clustering::ClusterLabeling labeling;
            if (options.labeling == LabelingMode::Heuristic) {
                labeling = clustering::heuristic_labeling(stack, output);
                per_image.push_back(score(
                    clustering::mask_from_output(output, labeling, stack.width, stack.height),
                    truths[i]));
            } else {
                // Oracle: evaluate both labelings, keep the better F-score.
                const EvalScores s0 = score(
                    clustering::mask_from_output(output, {0}, stack.width, stack.height), truths[i]);
                const EvalScores s1 = score(
                    clustering::mask_from_output(output, {1}, stack.width, stack.height), truths[i]);
                per_image.push_back(fscore_or_zero(s1) > fscore_or_zero(s0) ? s1 : s0);
            }
        }
        cell.scores = aggregate(per_image);
    } catch (const Error& e) {
        cell.status = e.what();
    }
    return cell;
}

std::string opt_fmt(const std::optional<double>& v) { return v ? csv::fmt(*v) : std::string(); }

}  // namespace

SweepGrid sweep(std::span<const ChannelStack> stacks, std::span<const SegmentationMask> truths,
                const SweepOptions& options) {
    if (stacks.size() != truths.size()) throw ShapeMismatch("stack/truth counts differ");
    if (stacks.empty()) throw Error("sweep: empty dataset");
    const std::vector<CellJob> jobs = cell_jobs();
    SweepGrid grid;
    grid.cells.resize(jobs.size());
    parallel_for(static_cast<int>(jobs.size()), options.workers,
                 [&](int i) { grid.cells[static_cast<size_t>(i)] = run_cell(jobs[static_cast<size_t>(i)], stacks, truths, options); });
    return grid;
}

const SweepCell& SweepGrid::cell(Channel a, Channel b) const {
    int ia = channel_index(a), ib = channel_index(b);
    if (ia > ib) std::swap(ia, ib);
    // index of (ia, ib) in the upper-triangular row-major order
    const int offset = ia * kChannelCount - ia * (ia - 1) / 2 + (ib - ia);
    return cells[static_cast<size_t>(offset)];
}

std::string SweepGrid::to_csv() const {
    std::string out = "channel_a,channel_b,precision,recall,fscore,status\n";
    for (const SweepCell& c : cells) {
        out += std::string(channel_code(c.a)) + ',' + std::string(channel_code(c.b)) + ',';
        out += opt_fmt(c.scores.mean_precision) + ',';
        out += opt_fmt(c.scores.mean_recall) + ',';
        out += opt_fmt(c.scores.mean_fscore) + ',';
        out += c.status + '\n';
    }
    return out;
}

std::array<std::array<double, kChannelCount>, kChannelCount> SweepGrid::fscore_matrix() const {
    std::array<std::array<double, kChannelCount>, kChannelCount> m{};
    for (const SweepCell& c : cells) {
        const double f = c.ok() ? c.scores.mean_fscore.value_or(0.0) : 0.0;
        m[channel_index(c.a)][channel_index(c.b)] = f;
        m[channel_index(c.b)][channel_index(c.a)] = f;
    }
    return m;
}

std::array<std::optional<double>, kChannelCount> SweepGrid::fscores_1d() const {
    std::array<std::optional<double>, kChannelCount> out;
    for (const SweepCell& c : cells)
        if (c.is_1d() && c.ok()) out[channel_index(c.a)] = c.scores.mean_fscore;
    return out;
}

std::vector<ReferenceRow> read_reference_rows(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingFile(path.string());
    std::vector<ReferenceRow> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        ReferenceRow row;
        std::string field;
        if (!std::getline(ss, row.name, ',')) continue;
        if (!std::getline(ss, field, ',')) throw Error("bad reference row: " + line);
        row.precision = std::stod(field);
        if (!std::getline(ss, field, ',')) throw Error("bad reference row: " + line);
        row.recall = std::stod(field);
        if (!std::getline(ss, field, ',')) throw Error("bad reference row: " + line);
        row.fscore = std::stod(field);
        rows.push_back(row);
    }
    return rows;
}

std::string leaderboard(const SweepGrid& grid, std::span<const ReferenceRow> reference,
                        std::optional<double> loading_fit_r2) {
    auto ranked = [&](bool want_1d) {
        std::vector<const SweepCell*> v;
        for (const SweepCell& c : grid.cells)
            if (c.is_1d() == want_1d && c.ok() && c.scores.mean_fscore) v.push_back(&c);
        std::sort(v.begin(), v.end(), [](const SweepCell* x, const SweepCell* y) {
            if (*x->scores.mean_fscore != *y->scores.mean_fscore)
                return *x->scores.mean_fscore > *y->scores.mean_fscore;
            if (x->a != y->a) return channel_index(x->a) < channel_index(y->a);
            return channel_index(x->b) < channel_index(y->b);
        });
        return v;
    };

    auto emit = [](std::string& out, const SweepCell& c, int rank) {
        char buf[160];
        std::string label(channel_code(c.a));
        label += " (" + std::string(channel_name(c.a)) + ")";
        if (!c.is_1d()) {
            label += " + " + std::string(channel_code(c.b));
            label += " (" + std::string(channel_name(c.b)) + ")";
        }
        std::snprintf(buf, sizeof(buf), "%2d. %-28s P=%s R=%s F=%s\n", rank, label.c_str(),
                      opt_fmt(c.scores.mean_precision).c_str(),
                      opt_fmt(c.scores.mean_recall).c_str(),
                      opt_fmt(c.scores.mean_fscore).c_str());
        out += buf;
    };

    std::string out = "1D channels by mean F-score\n";
    int rank = 0;
    for (const SweepCell* c : ranked(true)) emit(out, *c, ++rank);
    out += "\n2D pairs by mean F-score (top 20)\n";
    rank = 0;
    for (const SweepCell* c : ranked(false)) {
        emit(out, *c, ++rank);
        if (rank >= 20) break;
    }
    int failed = 0;
    for (const SweepCell& c : grid.cells) failed += !c.ok();
    if (failed > 0) out += "\nfailed cells: " + std::to_string(failed) + '\n';
    if (loading_fit_r2)
        out += "\nR^2 of 1D F-score on |PC1 loading|: " + csv::fmt(*loading_fit_r2) + '\n';
    if (!reference.empty()) {
        out += "\nreference scores (external, annotation only)\n";
        for (const ReferenceRow& r : reference) {
            char buf[160];
            std::snprintf(buf, sizeof(buf), "    %-28s P=%s R=%s F=%s\n", r.name.c_str(),
                          csv::fmt(r.precision).c_str(), csv::fmt(r.recall).c_str(),
                          csv::fmt(r.fscore).c_str());
            out += buf;
        }
    }
    return out;
}

double loading_fit(std::span<const double> loadings_pc1, std::span<const double> fscores_1d) {
    if (loadings_pc1.size() != fscores_1d.size() || loadings_pc1.empty())
        throw Error("loading_fit: mismatched inputs");
    const size_t n = loadings_pc1.size();
    double x_mean = 0.0, y_mean = 0.0;
    for (size_t i = 0; i < n; ++i) {
        if (!std::isfinite(loadings_pc1[i]) || !std::isfinite(fscores_1d[i]))
            throw Error("loading_fit: non-finite input");
        x_mean += std::abs(loadings_pc1[i]);
        y_mean += fscores_1d[i];
    }
    x_mean /= static_cast<double>(n);
    y_mean /= static_cast<double>(n);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double dx = std::abs(loadings_pc1[i]) - x_mean;
        const double dy = fscores_1d[i] - y_mean;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx <= 0.0) throw DegeneratePredictor();
    if (syy <= 0.0) return 1.0;  // responses all equal: zero-slope fit is exact
    const double r2 = (sxy * sxy) / (sxx * syy);
    return std::clamp(r2, 0.0, 1.0);
}

}  // namespace skycolor::evaluation
