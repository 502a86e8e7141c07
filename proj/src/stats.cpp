#include "skycolor/stats.hpp"

#include <algorithm>
#include <cmath>

#include "skycolor/csv.hpp"

namespace skycolor::stats {

namespace {

// Knuth two-sum: s = fl(a+b), err exact.
inline double two_sum(double a, double b, double& err) {
    const double s = a + b;
    const double bv = s - a;
    err = (a - (s - bv)) + (b - bv);
    return s;
}

}  // namespace

void CompensatedSum::add(double x) {
    double err;
    hi = two_sum(hi, x, err);
    lo += err;
}

void CompensatedSum::add(const CompensatedSum& other) {
    double err;
    hi = two_sum(hi, other.hi, err);
    lo += err + other.lo;
}

void MomentSummary::merge(const MomentSummary& other) {
    if (other.n == 0) return;
    if (n == 0) {
        *this = other;
        return;
    }
    const double w = static_cast<double>(other.n) / static_cast<double>(n + other.n);
    const double q = 1.0 - w;
    const double delta = other.mean - mean;
    const double d2 = delta * delta;
    const double m4c = m4 + w * (other.m4 - m4) +
                       d2 * d2 * w * q * (1.0 - 3.0 * w + 3.0 * w * w) +
                       6.0 * d2 * w * q * (q * other.m2 + w * m2) +
                       4.0 * delta * w * q * (other.m3 - m3);
    const double m3c = m3 + w * (other.m3 - m3) + delta * d2 * w * q * (1.0 - 2.0 * w) +
                       3.0 * delta * w * q * (other.m2 - m2);
    const double m2c = m2 + w * (other.m2 - m2) + d2 * w * q;
    mean += w * delta;
    m2 = m2c;
    m3 = m3c;
    m4 = m4c;
    n += other.n;
}

double MomentSummary::stddev() const { return std::sqrt(std::max(m2, 0.0)); }

double MomentSummary::skewness() const {
    if (degenerate()) throw DegenerateDistribution();
    return m3 / std::pow(m2, 1.5);
}

double MomentSummary::kurtosis() const {
    if (degenerate()) throw DegenerateDistribution();
    return m4 / (m2 * m2);
}

double MomentSummary::pbi() const {
    const double s = skewness();
    return kurtosis() - s * s;
}

void MomentAccumulator::add(double x) {
    if (n_ == 0) shift_ = x;
    const double d = x - shift_;
    const double d2 = d * d;
    s1_.add(d);
    s2_.add(d2);
    s3_.add(d2 * d);
    s4_.add(d2 * d2);
    ++n_;
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
    if (other.n_ == 0) return;
    if (n_ == 0) {
        *this = other;
        return;
    }
    if (other.shift_ == shift_) {
        s1_.add(other.s1_);
        s2_.add(other.s2_);
        s3_.add(other.s3_);
        s4_.add(other.s4_);
        n_ += other.n_;
        return;
    }
    // Rebase other's power sums from its shift onto ours: with t = x - other.shift
    // and g = other.shift - shift, sum (t + g)^k expands binomially.
    const double g = other.shift_ - shift_;
    const double g2 = g * g;
    const double on = static_cast<double>(other.n_);
    const double t1 = other.s1_.value();
    const double t2 = other.s2_.value();
    const double t3 = other.s3_.value();
    const double t4 = other.s4_.value();
    s1_.add(t1 + on * g);
    s2_.add(t2 + 2.0 * g * t1 + on * g2);
    s3_.add(t3 + 3.0 * g * t2 + 3.0 * g2 * t1 + on * g2 * g);
    s4_.add(t4 + 4.0 * g * t3 + 6.0 * g2 * t2 + 4.0 * g2 * g * t1 + on * g2 * g2);
    n_ += other.n_;
}

std::array<double, 4> MomentAccumulator::central_moments() const {
    const double n = static_cast<double>(n_);
    const double u1 = s1_.value() / n;
    const double u2 = s2_.value() / n;
    const double u3 = s3_.value() / n;
    const double u4 = s4_.value() / n;
    const double m2 = u2 - u1 * u1;
    const double m3 = u3 - 3.0 * u1 * u2 + 2.0 * u1 * u1 * u1;
    const double m4 = u4 - 4.0 * u1 * u3 + 6.0 * u1 * u1 * u2 - 3.0 * u1 * u1 * u1 * u1;
    return {u1, m2, m3, m4};
}

double MomentAccumulator::mean() const {
    if (n_ == 0) throw DegenerateDistribution();
    return shift_ + s1_.value() / static_cast<double>(n_);
}

MomentSummary MomentAccumulator::summary() const {
    MomentSummary s;
    s.n = n_;
    if (n_ == 0) return s;
    const auto m = central_moments();
    s.mean = shift_ + m[0];
    s.m2 = m[1];
    s.m3 = m[2];
    s.m4 = m[3];
    return s;
}

double MomentAccumulator::variance() const {
    if (n_ == 0) throw DegenerateDistribution();
    return std::max(central_moments()[1], 0.0);
}

double MomentAccumulator::stddev() const { return std::sqrt(variance()); }

bool MomentAccumulator::degenerate() const {
    if (n_ < 2) return true;
    return central_moments()[1] <= 0.0;
}

double MomentAccumulator::skewness() const {
    if (degenerate()) throw DegenerateDistribution();
    const auto m = central_moments();
    return m[2] / std::pow(m[1], 1.5);
}

double MomentAccumulator::kurtosis() const {
    if (degenerate()) throw DegenerateDistribution();
    const auto m = central_moments();
    return m[3] / (m[1] * m[1]);
}

double MomentAccumulator::pbi() const {
    const double s = skewness();
    return kurtosis() - s * s;
}

namespace {

MomentAccumulator accumulate(std::span<const double> samples) {
    MomentAccumulator acc;
    for (double x : samples) acc.add(x);
    return acc;
}

}  // namespace

double skewness(std::span<const double> samples) { return accumulate(samples).skewness(); }

double kurtosis(std::span<const double> samples) { return accumulate(samples).kurtosis(); }

double pbi(std::span<const double> samples) { return accumulate(samples).pbi(); }

PbiReport dataset_pbi(std::span<const ChannelStack> stacks) {
    if (stacks.empty()) throw Error("dataset_pbi: no stacks");
    std::array<MomentSummary, kChannelCount> total;
    for (const ChannelStack& stack : stacks) {
        std::array<MomentAccumulator, kChannelCount> part;
        for (int p = 0; p < stack.rows(); ++p)
            for (int j = 0; j < kChannelCount; ++j) part[j].add(stack.at(p, j));
        for (int j = 0; j < kChannelCount; ++j) total[j].merge(part[j].summary());
    }

    PbiReport report;
    report.entries.reserve(kChannelCount);
    for (int j = 0; j < kChannelCount; ++j) {
        const MomentSummary& s = total[j];
        ChannelMoments cm;
        cm.channel = channel_from_index(j);
        cm.n = s.n;
        if (s.degenerate()) {
            cm.degenerate = true;
            if (s.n > 0) cm.mean = s.mean;
        } else {
            cm.mean = s.mean;
            cm.stddev = s.stddev();
            cm.skewness = s.skewness();
            cm.kurtosis = s.kurtosis();
            cm.pbi = s.pbi();
        }
        report.entries.push_back(cm);
    }
    std::sort(report.entries.begin(), report.entries.end(),
              [](const ChannelMoments& a, const ChannelMoments& b) {
                  if (a.degenerate != b.degenerate) return b.degenerate;
                  if (a.degenerate) return channel_index(a.channel) < channel_index(b.channel);
                  if (a.pbi != b.pbi) return a.pbi < b.pbi;
                  return channel_index(a.channel) < channel_index(b.channel);
              });
    return report;
}

std::string PbiReport::to_csv() const {
    std::string out = "channel,n,mean,stddev,skewness,kurtosis,pbi\n";
    for (const ChannelMoments& cm : entries) {
        out += std::string(channel_code(cm.channel));
        out += ',';
        out += std::to_string(cm.n);
        out += ',';
        out += csv::fmt(cm.mean);
        out += ',';
        if (cm.degenerate) {
            out += "0,,,\n";
            continue;
        }
        out += csv::fmt(cm.stddev);
        out += ',';
        out += csv::fmt(cm.skewness);
        out += ',';
        out += csv::fmt(cm.kurtosis);
        out += ',';
        out += csv::fmt(cm.pbi);
        out += '\n';
    }
    return out;
}

}  // namespace skycolor::stats
