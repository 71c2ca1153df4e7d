#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "magshape/core/error.hpp"
#include "magshape/core/rng.hpp"
#include "magshape/eval_stats.hpp"

using namespace magshape;
using namespace magshape::stats;

namespace {

std::vector<double> gaussian_sample(size_t n, double mean, double sd, uint64_t seed) {
    Rng rng(seed);
    std::vector<double> out(n);
    for (auto& v : out) v = mean + sd * rng.normal();
    return out;
}

// independent reference for Welch's test, straight from the textbook formulas
struct WelchOracle {
    double t, df;
};
WelchOracle welch_oracle(const std::vector<double>& a, const std::vector<double>& b) {
    auto mean = [](const std::vector<double>& v) {
        double s = 0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    auto var = [&](const std::vector<double>& v) {
        double m = mean(v), s = 0;
        for (double x : v) s += (x - m) * (x - m);
        return s / static_cast<double>(v.size() - 1);
    };
    double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    double sa2 = var(a) / na, sb2 = var(b) / nb;
    double t = (mean(a) - mean(b)) / std::sqrt(sa2 + sb2);
    double df = (sa2 + sb2) * (sa2 + sb2) / (sa2 * sa2 / (na - 1) + sb2 * sb2 / (nb - 1));
    return {t, df};
}

}  // namespace

TEST_CASE("metrics: perfect prediction") {
    Eigen::MatrixXd truth = Eigen::MatrixXd::Random(40, 12);
    auto table = compute_metrics(truth, truth);
    for (const auto& m : table.per_output) {
        CHECK(m.rmse == 0.0);
        CHECK(m.r2 == doctest::Approx(1.0));
        CHECK(m.max_abs_err == 0.0);
    }
    CHECK(table.overall_rmse == 0.0);
    CHECK(table.overall_r2 == doctest::Approx(1.0));
}

TEST_CASE("metrics: constant offset in one column") {
    Eigen::MatrixXd truth = Eigen::MatrixXd::Random(25, 12);
    Eigen::MatrixXd pred = truth;
    pred.col(4).array() += 1.0;
    auto table = compute_metrics(pred, truth);
    CHECK(table.per_output[4].rmse == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(table.per_output[4].max_abs_err == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(table.per_output[3].rmse == 0.0);
}

TEST_CASE("metrics: hand-computed 3x2 case") {
    // truth col0 = {1,2,3}, pred col0 = {1,2,4}; truth col1 = {0,0,0} (undefined R2)
    Eigen::MatrixXd truth(3, 2), pred(3, 2);
    truth << 1, 0, 2, 0, 3, 0;
    pred << 1, 0.1, 2, -0.1, 4, 0.1;
    auto table = compute_metrics(pred, truth);
    // rmse0 = sqrt(1/3), R2_0 = 1 - 1/2 = 0.5, max0 = 1
    CHECK(table.per_output[0].rmse == doctest::Approx(std::sqrt(1.0 / 3.0)).epsilon(1e-12));
    CHECK(table.per_output[0].r2 == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(table.per_output[0].max_abs_err == doctest::Approx(1.0));
    CHECK_FALSE(table.per_output[1].r2_defined);
    // overall rmse^2 = mean of column MSEs = (1/3 + 0.01)/2
    CHECK(table.overall_rmse ==
          doctest::Approx(std::sqrt((1.0 / 3.0 + 0.01) / 2.0)).epsilon(1e-12));
}

TEST_CASE("metrics: per-point aggregation and column permutation invariance") {
    Rng rng(5);
    Eigen::MatrixXd truth = Eigen::MatrixXd::Random(60, 12);
    Eigen::MatrixXd pred = truth + 0.05 * Eigen::MatrixXd::Random(60, 12);
    auto table = compute_metrics(pred, truth);
    REQUIRE(table.per_point_rmse.size() == 4);
    // point aggregation is the RMS of its three column RMSEs
    for (int p = 0; p < 4; ++p) {
        double mse = 0;
        for (int k = 0; k < 3; ++k) {
            double r = table.per_output[static_cast<size_t>(3 * p + k)].rmse;
            mse += r * r;
        }
        CHECK(table.per_point_rmse[static_cast<size_t>(p)] ==
              doctest::Approx(std::sqrt(mse / 3.0)).epsilon(1e-12));
    }

    // permuting columns leaves the overall untouched
    std::vector<int> perm = {7, 3, 11, 0, 5, 9, 1, 10, 2, 8, 4, 6};
    Eigen::MatrixXd truth_p(60, 12), pred_p(60, 12);
    for (int c = 0; c < 12; ++c) {
        truth_p.col(c) = truth.col(perm[static_cast<size_t>(c)]);
        pred_p.col(c) = pred.col(perm[static_cast<size_t>(c)]);
    }
    auto table_p = compute_metrics(pred_p, truth_p);
    CHECK(table_p.overall_rmse == doctest::Approx(table.overall_rmse).epsilon(1e-12));
    CHECK(table_p.overall_max == doctest::Approx(table.overall_max).epsilon(1e-12));
}

TEST_CASE("rmse reduction: identities and the published arithmetic") {
    Eigen::MatrixXd truth = Eigen::MatrixXd::Random(30, 12);
    Eigen::MatrixXd pred = truth + 0.1 * Eigen::MatrixXd::Random(30, 12);
    auto t = compute_metrics(pred, truth);
    auto zero = rmse_reduction(t, t);
    CHECK(zero.overall_pct == 0.0);
    for (double p : zero.per_point_pct) CHECK(p == 0.0);

    // fixture: rounded inputs 0.121/0.087 must land within half a point of
    // the 28.37% computed from their unrounded sources
    double reduction = 100.0 * (0.121 - 0.087) / 0.121;
    CHECK(reduction == doctest::Approx(28.099).epsilon(1e-3));
    CHECK(std::abs(reduction - 28.37) < 0.5);

    // doubled baseline = 50%
    MetricsTable a, b;
    a.overall_rmse = 2.0;
    b.overall_rmse = 1.0;
    auto half = rmse_reduction(a, b);
    CHECK(half.overall_pct == doctest::Approx(50.0).epsilon(1e-12));

    MetricsTable degenerate;
    degenerate.overall_rmse = 0.0;
    CHECK_THROWS_AS(rmse_reduction(degenerate, b), Error);
}

TEST_CASE("histogram: at least one bin required") {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(4, 1);
    CHECK_THROWS_AS(error_histogram(m, m, 0), Error);
}

TEST_CASE("histogram: zero errors concentrate in the zero bin") {
    Eigen::MatrixXd truth = Eigen::MatrixXd::Random(50, 2);
    auto h = error_histogram(truth, truth, 9);
    for (const auto& col : h.counts) {
        int64_t total = 0;
        for (size_t b = 0; b < col.size(); ++b) {
            total += col[b];
            if (col[b] > 0) {
                CHECK(h.edges[b] <= 0.0);
                CHECK(h.edges[b + 1] >= 0.0);
            }
        }
        CHECK(total == 50);
    }
}

TEST_CASE("histogram: symmetric errors give a symmetric histogram") {
    Eigen::MatrixXd truth = Eigen::MatrixXd::Zero(100, 1);
    Eigen::MatrixXd pred(100, 1);
    for (int i = 0; i < 50; ++i) {
        pred(2 * i, 0) = 0.5;
        pred(2 * i + 1, 0) = -0.5;
    }
    auto h = error_histogram(pred, truth, 10);
    for (size_t b = 0; b < 10; ++b) CHECK(h.counts[0][b] == h.counts[0][9 - b]);
}

TEST_CASE("histogram: counts match an independent binning oracle") {
    Rng rng(77);
    const int n = 1000, bins = 23;
    Eigen::MatrixXd truth = Eigen::MatrixXd::Zero(n, 1), pred(n, 1);
    for (int i = 0; i < n; ++i) pred(i, 0) = rng.normal();
    auto h = error_histogram(pred, truth, bins, std::make_pair(-4.0, 4.0));

    std::vector<int64_t> oracle(bins, 0);
    for (int i = 0; i < n; ++i) {
        double v = pred(i, 0);
        if (v < -4.0 || v > 4.0) continue;
        int idx = std::min(bins - 1, static_cast<int>((v + 4.0) / (8.0 / bins)));
        ++oracle[static_cast<size_t>(idx)];
    }
    for (int b = 0; b < bins; ++b) CHECK(h.counts[0][static_cast<size_t>(b)] == oracle[static_cast<size_t>(b)]);

    int64_t total = 0;
    for (auto c : h.counts[0]) total += c;
    CHECK(total == n);  // range covers everything here
}

TEST_CASE("welch: identical samples give t = 0, p ~ 1") {
    auto a = gaussian_sample(50, 1.0, 0.5, 1);
    auto res = welch_t_test(a, a);
    CHECK(res.t == doctest::Approx(0.0));
    CHECK(res.p == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("welch: matches the reference formulas on Gaussian fixtures") {
    auto a = gaussian_sample(200, 0.0, 1.0, 11);
    auto b = gaussian_sample(200, 1.0, 1.0, 12);
    auto res = welch_t_test(a, b);
    auto oracle = welch_oracle(a, b);
    CHECK(res.t == doctest::Approx(oracle.t).epsilon(1e-9));
    CHECK(res.df == doctest::Approx(oracle.df).epsilon(1e-9));
    CHECK(res.p < 1e-10);  // separated by one SD at n=200

    // antisymmetry under swapping
    auto rev = welch_t_test(b, a);
    CHECK(rev.t == doctest::Approx(-res.t).epsilon(1e-12));
    CHECK(rev.df == doctest::Approx(res.df).epsilon(1e-12));
    CHECK(rev.p == doctest::Approx(res.p).epsilon(1e-12));
}

TEST_CASE("welch/levene/lilliefors: scale invariance") {
    auto a = gaussian_sample(120, 0.3, 1.0, 21);
    auto b = gaussian_sample(150, 0.4, 2.0, 22);
    auto sa = a, sb = b;
    for (auto& v : sa) v *= 7.5;
    for (auto& v : sb) v *= 7.5;

    auto w1 = welch_t_test(a, b), w2 = welch_t_test(sa, sb);
    CHECK(w1.t == doctest::Approx(w2.t).epsilon(1e-9));
    CHECK(w1.df == doctest::Approx(w2.df).epsilon(1e-9));

    auto l1 = levene_test(a, b), l2 = levene_test(sa, sb);
    CHECK(l1.w == doctest::Approx(l2.w).epsilon(1e-9));

    CHECK(lilliefors_statistic(a) == doctest::Approx(lilliefors_statistic(sa)).epsilon(1e-9));
}

TEST_CASE("levene: equal-variance vs unequal-variance fixtures") {
    auto a = gaussian_sample(300, 0.0, 1.0, 31);
    auto b = gaussian_sample(300, 0.0, 1.0, 32);
    auto c = gaussian_sample(300, 0.0, 3.0, 33);
    CHECK(levene_test(a, b).p > 0.01);
    CHECK(levene_test(a, c).p < 1e-6);

    std::vector<double> constant(10, 2.0);
    CHECK_THROWS_AS(levene_test(constant, constant), Error);
}

TEST_CASE("levene: matches a hand-rolled F computation") {
    auto a = gaussian_sample(40, 0.0, 1.0, 41);
    auto b = gaussian_sample(60, 0.0, 1.5, 42);
    auto res = levene_test(a, b);

    // oracle: one-way ANOVA F on |x - group mean|
    auto mean = [](const std::vector<double>& v) {
        double s = 0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    double ma = mean(a), mb = mean(b);
    std::vector<double> za, zb;
    for (double x : a) za.push_back(std::abs(x - ma));
    for (double x : b) zb.push_back(std::abs(x - mb));
    double mza = mean(za), mzb = mean(zb);
    double grand = (40.0 * mza + 60.0 * mzb) / 100.0;
    double ssb = 40.0 * (mza - grand) * (mza - grand) + 60.0 * (mzb - grand) * (mzb - grand);
    double ssw = 0;
    for (double z : za) ssw += (z - mza) * (z - mza);
    for (double z : zb) ssw += (z - mzb) * (z - mzb);
    double f = (ssb / 1.0) / (ssw / 98.0);
    CHECK(res.w == doctest::Approx(f).epsilon(1e-9));
}

TEST_CASE("lilliefors: D statistic against a direct implementation") {
    auto a = gaussian_sample(64, 0.5, 2.0, 51);
    std::vector<double> sorted = a;
    std::sort(sorted.begin(), sorted.end());
    double m = 0, sd = 0;
    for (double x : a) m += x;
    m /= static_cast<double>(a.size());
    for (double x : a) sd += (x - m) * (x - m);
    sd = std::sqrt(sd / static_cast<double>(a.size() - 1));
    double d = 0;
    for (size_t i = 0; i < sorted.size(); ++i) {
        double z = 0.5 * std::erfc(-(sorted[i] - m) / sd / std::numbers::sqrt2);
        d = std::max(d, std::abs(static_cast<double>(i + 1) / 64.0 - z));
        d = std::max(d, std::abs(z - static_cast<double>(i) / 64.0));
    }
    CHECK(lilliefors_statistic(a) == doctest::Approx(d).epsilon(1e-12));
}

TEST_CASE("lilliefors: rejects uniform data with high power") {
    const size_t n = 500;
    const int n_mc = 400;  // p resolution ~0.0025, ample for an alpha=0.05 call
    int rejections = 0;
    const int n_seeds = 100;
    for (int s = 0; s < n_seeds; ++s) {
        Rng rng(static_cast<uint64_t>(9000 + s));
        std::vector<double> u(n);
        for (auto& v : u) v = rng.uniform();
        auto res = lilliefors_test(u, n_mc, static_cast<uint64_t>(70 + s));
        if (res.p < 0.05) ++rejections;
    }
    CHECK(rejections >= static_cast<int>(0.95 * n_seeds));
}

TEST_CASE("lilliefors: accepts Gaussian data at roughly the nominal rate") {
    int rejections = 0;
    const int n_seeds = 30;
    for (int s = 0; s < n_seeds; ++s) {
        auto g = gaussian_sample(200, 0.0, 1.0, static_cast<uint64_t>(600 + s));
        auto res = lilliefors_test(g, 300, static_cast<uint64_t>(80 + s));
        if (res.p < 0.05) ++rejections;
    }
    CHECK(rejections <= n_seeds / 4);  // far from systematic rejection
}

TEST_CASE("lilliefors: deterministic p-value for a fixed seed") {
    auto g = gaussian_sample(100, 0.0, 1.0, 91);
    auto r1 = lilliefors_test(g, 500, 7);
    auto r2 = lilliefors_test(g, 500, 7);
    CHECK(r1.p == r2.p);
}

TEST_CASE("compare_models: end-to-end battery on separated fixtures") {
    auto a = gaussian_sample(300, 0.283, 0.329, 61);
    auto b = gaussian_sample(300, 0.131, 0.204, 62);
    auto rep = compare_models(a, b, 400, 5);
    CHECK(rep.welch.p < 1e-6);
    CHECK(rep.welch.t > 0.0);  // first sample has the larger mean
    CHECK(rep.levene.p < 0.05);
    CHECK(rep.mean_a > rep.mean_b);
    CHECK(rep.n_a == 300);

    std::vector<double> tiny = {1, 2, 3};
    CHECK_THROWS_AS(compare_models(tiny, tiny, 10, 1), Error);
}

TEST_CASE("per-sample total errors") {
    Eigen::MatrixXd truth = Eigen::MatrixXd::Zero(3, 12);
    Eigen::MatrixXd pred = Eigen::MatrixXd::Zero(3, 12);
    pred(1, 0) = 3.0;
    pred(1, 5) = 4.0;
    auto errs = per_sample_total_errors(pred, truth);
    CHECK(errs[0] == 0.0);
    CHECK(errs[1] == doctest::Approx(25.0).epsilon(1e-12));
}

TEST_CASE("t distribution CDF sanity") {
    CHECK(students_t_cdf(0.0, 5.0) == doctest::Approx(0.5).epsilon(1e-12));
    // symmetric tails
    CHECK(students_t_cdf(-1.7, 9.0) == doctest::Approx(1.0 - students_t_cdf(1.7, 9.0)).epsilon(1e-12));
    // large df approaches the normal
    CHECK(students_t_cdf(1.96, 1e6) == doctest::Approx(normal_cdf(1.96)).epsilon(1e-4));
    // classic table value: t=2.228, df=10 -> 0.975
    CHECK(students_t_cdf(2.228, 10.0) == doctest::Approx(0.975).epsilon(1e-4));
}

TEST_CASE("pearson r on a perfect line and a noisy one") {
    std::vector<double> x, y;
    Rng rng(71);
    for (int i = 0; i < 100; ++i) {
        double v = rng.uniform(-1, 1);
        x.push_back(v);
        y.push_back(2.0 * v + 1.0);
    }
    CHECK(pearson_r(x, y) == doctest::Approx(1.0).epsilon(1e-12));
    for (auto& v : y) v += rng.normal() * 2.0;
    double r = pearson_r(x, y);
    CHECK(r > 0.0);
    CHECK(r < 1.0);
}
