#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "skycolor/stats.hpp"
#include "test_util.hpp"

using namespace skycolor;
using namespace skycolor::stats;

namespace {

// Naive two-pass oracle: exact mean first, then central power sums.
struct TwoPass {
    double mean = 0, m2 = 0, m3 = 0, m4 = 0;
};

TwoPass two_pass(const std::vector<double>& samples) {
    TwoPass r;
    const double n = static_cast<double>(samples.size());
    for (double x : samples) r.mean += x;
    r.mean /= n;
    for (double x : samples) {
        const double d = x - r.mean;
        r.m2 += d * d;
        r.m3 += d * d * d;
        r.m4 += d * d * d * d;
    }
    r.m2 /= n;
    r.m3 /= n;
    r.m4 /= n;
    return r;
}

ChannelStack stack_from_columns(const std::vector<std::vector<double>>& columns) {
    ChannelStack stack;
    stack.width = static_cast<int>(columns.front().size());
    stack.height = 1;
    stack.values.resize(static_cast<size_t>(stack.rows()) * kChannelCount);
    for (int p = 0; p < stack.rows(); ++p)
        for (int j = 0; j < kChannelCount; ++j)
            stack.at(p, j) = columns[static_cast<size_t>(j)][static_cast<size_t>(p)];
    return stack;
}

}  // namespace

TEST_SUITE_BEGIN("stats");

TEST_CASE("skewness") {
    CHECK(skewness(std::vector<double>{-1, 0, 1}) == doctest::Approx(0.0));
    const double expected = 2.0 / std::sqrt(3.0);
    CHECK(skewness(std::vector<double>{0, 0, 0, 1}) == doctest::Approx(expected).epsilon(1e-12));
    // against the two-pass oracle
    const TwoPass tp = two_pass({0, 0, 0, 1});
    CHECK(skewness(std::vector<double>{0, 0, 0, 1}) ==
          doctest::Approx(tp.m3 / std::pow(tp.m2, 1.5)).epsilon(1e-12));
    CHECK_THROWS_AS(skewness(std::vector<double>{1, 1}), DegenerateDistribution);
}

TEST_CASE("kurtosis") {
    CHECK(kurtosis(std::vector<double>{-1, 1, -1, 1}) == 1.0);

    std::mt19937_64 rng(101);
    std::vector<double> normal(1000000);
    for (double& x : normal) x = testutil::gaussian(rng);
    CHECK(std::abs(kurtosis(normal) - 3.0) < 0.1);

    std::vector<double> uniform(1000000);
    for (double& x : uniform) x = testutil::uniform(rng);
    CHECK(std::abs(kurtosis(uniform) - 1.8) < 0.05);
}

TEST_CASE("pbi") {
    std::mt19937_64 rng(202);
    std::vector<double> normal(1000000);
    for (double& x : normal) x = testutil::gaussian(rng);
    CHECK(std::abs(pbi(normal) - 3.0) < 0.1);

    // strongly separated balanced mixture approaches the two-point-mass limit
    std::vector<double> mixture(100000);
    for (size_t i = 0; i < mixture.size(); ++i)
        mixture[i] = (i % 2 ? 50.0 : -50.0) + 0.1 * testutil::gaussian(rng);
    const double p = pbi(mixture);
    CHECK(p > 0.999);
    CHECK(p < 1.05);
}

TEST_CASE("pbi affine invariance") {
    std::mt19937_64 rng(303);
    std::vector<double> base(10000);
    for (double& x : base) x = testutil::gaussian(rng) + 0.5 * testutil::uniform(rng);
    const double reference = pbi(base);
    for (const auto [a, b] : {std::pair{3.7, 11.0}, std::pair{-2.5, 4.0}, std::pair{0.001, -9.0}}) {
        std::vector<double> mapped(base.size());
        for (size_t i = 0; i < base.size(); ++i) mapped[i] = a * base[i] + b;
        CHECK(pbi(mapped) == doctest::Approx(reference).epsilon(1e-9));
    }
}

TEST_CASE("pbi floor of 1 on random inputs") {
    std::mt19937_64 rng(404);
    for (int trial = 0; trial < 50; ++trial) {
        const size_t n = 3 + rng() % 500;
        std::vector<double> samples(n);
        for (double& x : samples) x = testutil::uniform(rng, -10, 10);
        TwoPass tp = two_pass(samples);
        if (tp.m2 <= 0.0) continue;
        CHECK(pbi(samples) >= 1.0 - 1e-9);
    }
}

TEST_CASE("one-pass agrees with two-pass on a million samples") {
    std::mt19937_64 rng(505);
    std::vector<double> samples(1000000);
    for (double& x : samples) x = 100.0 + 15.0 * testutil::gaussian(rng);
    const TwoPass tp = two_pass(samples);
    MomentAccumulator acc;
    for (double x : samples) acc.add(x);
    CHECK(acc.mean() == doctest::Approx(tp.mean).epsilon(1e-9));
    CHECK(acc.variance() == doctest::Approx(tp.m2).epsilon(1e-9));
    CHECK(acc.skewness() == doctest::Approx(tp.m3 / std::pow(tp.m2, 1.5)).epsilon(1e-9));
    CHECK(acc.kurtosis() == doctest::Approx(tp.m4 / (tp.m2 * tp.m2)).epsilon(1e-9));
}

TEST_CASE("merge of partial accumulators matches sequential") {
    std::mt19937_64 rng(606);
    std::vector<double> samples(20000);
    for (double& x : samples) x = testutil::uniform(rng, -3, 7);

    MomentAccumulator sequential;
    for (double x : samples) sequential.add(x);

    MomentAccumulator merged;
    size_t start = 0;
    while (start < samples.size()) {
        const size_t len = std::min<size_t>(1 + rng() % 4096, samples.size() - start);
        MomentAccumulator part;
        for (size_t i = start; i < start + len; ++i) part.add(samples[i]);
        merged.merge(part);
        start += len;
    }
    CHECK(merged.count() == sequential.count());
    CHECK(merged.mean() == doctest::Approx(sequential.mean()).epsilon(1e-9));
    CHECK(merged.pbi() == doctest::Approx(sequential.pbi()).epsilon(1e-9));
}

TEST_CASE("dataset pbi ranks a two-level channel as most bimodal") {
    std::mt19937_64 rng(707);
    const int n = 4096;
    std::vector<std::vector<double>> columns(kChannelCount, std::vector<double>(n));
    for (int p = 0; p < n; ++p) {
        columns[0][static_cast<size_t>(p)] = (p % 2) ? 200.0 : 20.0;  // crisp two-level
        for (int j = 1; j < kChannelCount; ++j)
            columns[static_cast<size_t>(j)][static_cast<size_t>(p)] = testutil::gaussian(rng);
    }
    const ChannelStack stack = stack_from_columns(columns);
    const PbiReport report = dataset_pbi(std::vector<ChannelStack>{stack});
    CHECK(report.entries.front().channel == Channel::R);

    double pbi_c1 = 0, pbi_c2 = 0;
    for (const ChannelMoments& cm : report.entries) {
        if (cm.channel == Channel::R) pbi_c1 = cm.pbi;
        if (cm.channel == Channel::G) pbi_c2 = cm.pbi;
    }
    CHECK(pbi_c1 < pbi_c2);
    // ascending order
    for (size_t i = 1; i < report.entries.size(); ++i) {
        if (report.entries[i].degenerate) break;
        CHECK(report.entries[i - 1].pbi <= report.entries[i].pbi);
    }
}

TEST_CASE("dataset pbi flags degenerate channels without aborting") {
    ChannelStack single;
    single.width = 1;
    single.height = 1;
    single.values.assign(kChannelCount, 5.0);
    const PbiReport report = dataset_pbi(std::vector<ChannelStack>{single});
    REQUIRE(report.entries.size() == kChannelCount);
    for (const ChannelMoments& cm : report.entries) CHECK(cm.degenerate);
}

TEST_CASE("dataset pbi is idempotent under stack duplication") {
    std::mt19937_64 rng(808);
    std::vector<std::vector<double>> columns(kChannelCount, std::vector<double>(512));
    for (auto& col : columns)
        for (double& x : col) x = testutil::uniform(rng, 0, 255);
    const ChannelStack stack = stack_from_columns(columns);

    const PbiReport once = dataset_pbi(std::vector<ChannelStack>{stack});
    const PbiReport thrice = dataset_pbi(std::vector<ChannelStack>{stack, stack, stack});
    REQUIRE(once.entries.size() == thrice.entries.size());
    for (size_t i = 0; i < once.entries.size(); ++i) {
        CHECK(once.entries[i].channel == thrice.entries[i].channel);
        CHECK(once.entries[i].pbi == thrice.entries[i].pbi);
        CHECK(thrice.entries[i].n == 3 * once.entries[i].n);
    }
}

TEST_CASE("dataset pbi equals direct concatenation") {
    std::mt19937_64 rng(818);
    std::vector<ChannelStack> stacks;
    std::vector<std::vector<double>> concatenated(kChannelCount);
    for (int s = 0; s < 4; ++s) {
        std::vector<std::vector<double>> columns(kChannelCount,
                                                 std::vector<double>(100 + 57 * s));
        for (int j = 0; j < kChannelCount; ++j)
            for (double& x : columns[static_cast<size_t>(j)]) {
                x = testutil::uniform(rng, -5, 5) + j;
                concatenated[static_cast<size_t>(j)].push_back(x);
            }
        stacks.push_back(stack_from_columns(columns));
    }
    const PbiReport report = dataset_pbi(stacks);
    for (const ChannelMoments& cm : report.entries) {
        const double direct = pbi(concatenated[static_cast<size_t>(channel_index(cm.channel))]);
        CHECK(cm.pbi == doctest::Approx(direct).epsilon(1e-12));
    }
}

TEST_CASE("pbi report csv") {
    std::mt19937_64 rng(909);
    std::vector<std::vector<double>> columns(kChannelCount, std::vector<double>(64));
    for (auto& col : columns)
        for (double& x : col) x = testutil::uniform(rng, 0, 1);
    const PbiReport report = dataset_pbi(std::vector<ChannelStack>{stack_from_columns(columns)});
    const std::string csv = report.to_csv();
    CHECK(csv.rfind("channel,n,mean,stddev,skewness,kurtosis,pbi\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == kChannelCount + 1);
}

TEST_SUITE_END();
