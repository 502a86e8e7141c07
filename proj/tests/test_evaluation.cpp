#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "skycolor/colorspace.hpp"
#include "skycolor/dataset.hpp"
#include "skycolor/evaluation.hpp"
#include "test_util.hpp"

using namespace skycolor;
using namespace skycolor::evaluation;

namespace {

SegmentationMask mask_of(int width, int height, const std::vector<std::uint8_t>& labels) {
    SegmentationMask m;
    m.width = width;
    m.height = height;
    m.labels = labels;
    return m;
}

struct SmallDataset {
    std::vector<ChannelStack> stacks;
    std::vector<SegmentationMask> truths;
};

SmallDataset make_dataset(int count, int side, std::uint64_t seed) {
    SmallDataset data;
    for (const dataset::SynthSpec& spec : dataset::fixture_specs(count, side, side, 8.0, seed)) {
        dataset::SynthResult synth = dataset::generate_synthetic(spec);
        data.stacks.push_back(colorspace::extract_channels(synth.image, "img" + std::to_string(data.stacks.size())));
        data.truths.push_back(std::move(synth.truth));
    }
    return data;
}

}  // namespace

TEST_SUITE_BEGIN("evaluation");

TEST_CASE("score identical masks") {
    const SegmentationMask m = mask_of(2, 2, {1, 0, 0, 1});
    const EvalScores s = score(m, m);
    CHECK(s.precision == 1.0);
    CHECK(s.recall == 1.0);
    CHECK(s.fscore == 1.0);
    CHECK(s.tp + s.fp + s.fn + s.tn == 4);
}

TEST_CASE("all-sky prediction against half-cloud truth") {
    const SegmentationMask mask = mask_of(2, 2, {0, 0, 0, 0});
    const SegmentationMask truth = mask_of(2, 2, {1, 1, 0, 0});
    const EvalScores s = score(mask, truth);
    CHECK_FALSE(s.precision.has_value());  // no predicted positives
    CHECK(s.recall == 0.0);
    CHECK_FALSE(s.fscore.has_value());
}

TEST_CASE("hand-counted 2x2 fixture") {
    const SegmentationMask mask = mask_of(2, 2, {1, 0, 0, 0});
    const SegmentationMask truth = mask_of(2, 2, {1, 1, 0, 0});
    const EvalScores s = score(mask, truth);
    CHECK(s.tp == 1);
    CHECK(s.fn == 1);
    CHECK(s.fp == 0);
    CHECK(s.tn == 2);
    CHECK(s.precision == 1.0);
    CHECK(s.recall == 0.5);
    CHECK(*s.fscore == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("shape mismatch is rejected") {
    CHECK_THROWS_AS(score(mask_of(2, 1, {0, 0}), mask_of(1, 2, {0, 0})), ShapeMismatch);
}

TEST_CASE("label swap symmetry") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::uint8_t> a(36), b(36);
        for (size_t i = 0; i < a.size(); ++i) {
            a[i] = rng() % 2;
            b[i] = rng() % 2;
        }
        const EvalScores forward = score(mask_of(6, 6, a), mask_of(6, 6, b));
        for (auto& v : a) v = 1 - v;
        for (auto& v : b) v = 1 - v;
        const EvalScores swapped = score(mask_of(6, 6, a), mask_of(6, 6, b));
        CHECK(swapped.tp == forward.tn);
        CHECK(swapped.tn == forward.tp);
        CHECK(swapped.fp == forward.fn);
        CHECK(swapped.fn == forward.fp);
        if (forward.fscore) {
            CHECK(*forward.fscore <= 1.0);
            if (forward.fp == 0 && forward.fn == 0)
                CHECK(*forward.fscore == 1.0);
            else
                CHECK(*forward.fscore < 1.0);
        }
    }
}

TEST_CASE("aggregate means and pooling") {
    EvalScores a;
    a.tp = 2;
    a.fp = 3;
    a.fn = 3;
    a.tn = 2;
    a.precision = 0.4;
    a.recall = 0.4;
    a.fscore = 0.4;
    EvalScores b = a;
    b.precision = b.recall = b.fscore = 0.8;

    const AggregateScores equal = aggregate(std::vector<EvalScores>{a, a});
    CHECK(*equal.mean_fscore == doctest::Approx(0.4));
    CHECK(*equal.pooled.precision == doctest::Approx(0.4));

    const AggregateScores mixed = aggregate(std::vector<EvalScores>{a, b});
    CHECK(*mixed.mean_fscore == doctest::Approx(0.6));

    // 1-pixel + 3-pixel fixture: pooled differs from mean-of-images.
    // image A: tp=1 (P=R=1); image B: tp=1, fp=1, fn=1 (P=R=1/2).
    EvalScores tiny;
    tiny.tp = 1;
    tiny.precision = tiny.recall = tiny.fscore = 1.0;
    EvalScores larger;
    larger.tp = 1;
    larger.fp = 1;
    larger.fn = 1;
    larger.precision = larger.recall = larger.fscore = 0.5;
    const AggregateScores agg = aggregate(std::vector<EvalScores>{tiny, larger});
    CHECK(*agg.mean_fscore == doctest::Approx(0.75));
    CHECK(*agg.pooled.precision == doctest::Approx(2.0 / 3.0));  // pooled tp=2, fp=1
    CHECK(*agg.pooled.fscore != *agg.mean_fscore);

    // undefined ratios are excluded with a count, not coerced
    EvalScores undefined_scores;
    undefined_scores.tn = 4;
    const AggregateScores with_undefined =
        aggregate(std::vector<EvalScores>{a, undefined_scores});
    CHECK(with_undefined.excluded_fscore == 1);
    CHECK(*with_undefined.mean_fscore == doctest::Approx(0.4));
}

TEST_CASE("leave-one-out influence bound") {
    std::mt19937_64 rng(6);
    std::vector<EvalScores> scores(12);
    for (EvalScores& s : scores) {
        s.tp = 1 + rng() % 9;
        s.fp = rng() % 5;
        s.fn = rng() % 5;
        s.precision = static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fp);
        s.recall = static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fn);
        s.fscore = 2.0 * *s.precision * *s.recall / (*s.precision + *s.recall);
    }
    const double full = *aggregate(scores).mean_fscore;
    const double n = static_cast<double>(scores.size());
    for (size_t leave = 0; leave < scores.size(); ++leave) {
        std::vector<EvalScores> rest;
        for (size_t i = 0; i < scores.size(); ++i)
            if (i != leave) rest.push_back(scores[i]);
        const double reduced = *aggregate(rest).mean_fscore;
        CHECK(std::abs(full - reduced) <= 1.0 / (n - 1.0) + 1e-12);
    }
}

TEST_CASE("sweep covers all cells deterministically") {
    const SmallDataset data = make_dataset(3, 32, 99);
    SweepOptions options;
    options.workers = 1;
    const SweepGrid grid = sweep(data.stacks, data.truths, options);
    REQUIRE(grid.cells.size() == 136);
    int ok = 0;
    for (const SweepCell& c : grid.cells) ok += c.ok();
    CHECK(ok == 136);

    // diagonal + symmetric lookup
    const SweepCell& diag = grid.cell(Channel::S, Channel::S);
    CHECK(diag.is_1d());
    CHECK(&grid.cell(Channel::S, Channel::I) == &grid.cell(Channel::I, Channel::S));

    const auto matrix = grid.fscore_matrix();
    for (int a = 0; a < kChannelCount; ++a)
        for (int b = 0; b < kChannelCount; ++b) CHECK(matrix[a][b] == matrix[b][a]);

    // repeated run is bit-identical
    const SweepGrid again = sweep(data.stacks, data.truths, options);
    CHECK(grid.to_csv() == again.to_csv());

    // worker count does not change bytes
    options.workers = 4;
    const SweepGrid parallel = sweep(data.stacks, data.truths, options);
    CHECK(grid.to_csv() == parallel.to_csv());
}

TEST_CASE("sweep heuristic labeling mode") {
    const SmallDataset data = make_dataset(2, 32, 7);
    SweepOptions options;
    options.labeling = LabelingMode::Heuristic;
    const SweepGrid grid = sweep(data.stacks, data.truths, options);
    const SweepCell& ratio_cell = grid.cell(Channel::RatioRB, Channel::RatioRB);
    REQUIRE(ratio_cell.ok());
    CHECK(*ratio_cell.scores.mean_fscore > 0.9);
}

TEST_CASE("2D pair scores at least the worse of its single channels") {
    const SmallDataset data = make_dataset(3, 48, 21);
    SweepOptions options;
    const SweepGrid grid = sweep(data.stacks, data.truths, options);
    const SweepCell& c5 = grid.cell(Channel::S, Channel::S);
    const SweepCell& c8 = grid.cell(Channel::I, Channel::I);
    const SweepCell& pair = grid.cell(Channel::S, Channel::I);
    REQUIRE(c5.ok());
    REQUIRE(c8.ok());
    REQUIRE(pair.ok());
    CHECK(*pair.scores.mean_fscore >=
          std::min(*c5.scores.mean_fscore, *c8.scores.mean_fscore) - 1e-9);
}

TEST_CASE("degenerate channels fail in-cell without aborting the sweep") {
    // grayscale noise: H, S, R/B, R-B, (B-R)/(B+R), and C are exactly
    // constant, so their cells are degenerate while R/G/B/V/Y/L* still cluster
    std::mt19937_64 rng(77);
    RgbImage gray = make_rgb_image(24, 24);
    for (int i = 0; i < gray.pixel_count(); ++i) {
        const std::uint8_t v = static_cast<std::uint8_t>(40 + rng() % 180);
        gray.pixel(i)[0] = gray.pixel(i)[1] = gray.pixel(i)[2] = v;
    }
    std::vector<ChannelStack> stacks{colorspace::extract_channels(gray, "gray")};
    SegmentationMask truth;
    truth.width = truth.height = 24;
    truth.labels.resize(576);
    for (int i = 0; i < 576; ++i) truth.labels[static_cast<size_t>(i)] = i < 288;
    std::vector<SegmentationMask> truths{truth};

    const SweepGrid grid = sweep(stacks, truths, SweepOptions{});
    REQUIRE(grid.cells.size() == 136);
    CHECK_FALSE(grid.cell(Channel::S, Channel::S).ok());
    CHECK_FALSE(grid.cell(Channel::H, Channel::S).ok());
    CHECK_FALSE(grid.cell(Channel::RatioRB, Channel::Chroma).ok());
    CHECK(grid.cell(Channel::R, Channel::R).ok());
    CHECK(grid.cell(Channel::V, Channel::LStar).ok());
    int ok = 0;
    for (const SweepCell& c : grid.cells) ok += c.ok();
    CHECK(ok > 0);
    CHECK(ok < 136);
    // failed cells carry a reason and empty scores in the CSV
    const std::string csv = grid.to_csv();
    CHECK(csv.find("identical") != std::string::npos);
}

TEST_CASE("sweep csv layout") {
    const SmallDataset data = make_dataset(2, 32, 55);
    const SweepGrid grid = sweep(data.stacks, data.truths, SweepOptions{});
    const std::string csv = grid.to_csv();
    CHECK(csv.rfind("channel_a,channel_b,precision,recall,fscore,status\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 137);
}

TEST_CASE("loading fit") {
    std::vector<double> loadings(16), fscores(16);
    for (int i = 0; i < 16; ++i) {
        loadings[static_cast<size_t>(i)] = (i % 2 ? -1.0 : 1.0) * (0.1 + 0.05 * i);
        fscores[static_cast<size_t>(i)] = 0.2 + 0.04 * i;  // exactly linear in |loading|
    }
    CHECK(loading_fit(loadings, fscores) == doctest::Approx(1.0).epsilon(1e-9));

    std::vector<double> constant(16, 0.5);
    CHECK_THROWS_AS(loading_fit(constant, fscores), DegeneratePredictor);

    std::mt19937_64 rng(8);
    std::vector<double> noisy(16);
    for (double& v : noisy) v = testutil::uniform(rng);
    const double r2 = loading_fit(noisy, fscores);
    CHECK(r2 >= 0.0);
    CHECK(r2 <= 1.0);
}

TEST_CASE("reference rows and leaderboard annotation") {
    testutil::TempDir dir("refrows");
    const auto path = dir.path() / "reference.csv";
    {
        std::ofstream out(path);
        out << "# comparison algorithm\n";
        out << "li2011,0.92,0.89,0.90\n";
    }
    const std::vector<ReferenceRow> rows = read_reference_rows(path);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].name == "li2011");
    CHECK(rows[0].fscore == doctest::Approx(0.90));

    const SmallDataset data = make_dataset(2, 32, 3);
    const SweepGrid grid = sweep(data.stacks, data.truths, SweepOptions{});
    const std::string board = leaderboard(grid, rows, 0.42);
    CHECK(board.find("li2011") != std::string::npos);
    CHECK(board.find("R^2") != std::string::npos);
    CHECK(board.find("1D channels") != std::string::npos);
}

TEST_SUITE_END();
