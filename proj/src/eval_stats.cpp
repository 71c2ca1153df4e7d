#include "magshape/eval_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "magshape/core/error.hpp"
#include "magshape/core/parallel.hpp"
#include "magshape/core/rng.hpp"

namespace magshape::stats {

namespace {

void check_same_shape(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth) {
    if (pred.rows() != truth.rows() || pred.cols() != truth.cols())
        throw_data("metrics: prediction/truth shape mismatch");
    if (pred.rows() == 0) throw_data("metrics: empty input");
}

double sample_mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v, double mean) {
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return s / (static_cast<double>(v.size()) - 1.0);
}

}  // namespace

MetricsTable compute_metrics(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth) {
    check_same_shape(pred, truth);
    const auto n = truth.rows();
    const auto cols = truth.cols();

    MetricsTable table;
    table.per_output.resize(static_cast<size_t>(cols));
    double mse_sum = 0.0;
    double ss_res_total = 0.0, ss_tot_total = 0.0;
    for (Eigen::Index c = 0; c < cols; ++c) {
        Eigen::VectorXd err = pred.col(c) - truth.col(c);
        OutputMetrics& m = table.per_output[static_cast<size_t>(c)];
        const double ss_res = err.squaredNorm();
        m.rmse = std::sqrt(ss_res / static_cast<double>(n));
        m.max_abs_err = err.cwiseAbs().maxCoeff();
        const double mean = truth.col(c).mean();
        const double ss_tot = (truth.col(c).array() - mean).square().sum();
        if (ss_tot > 0.0) {
            m.r2 = 1.0 - ss_res / ss_tot;
        } else {
            m.r2_defined = false;  // constant truth column, R^2 undefined
            m.r2 = std::numeric_limits<double>::quiet_NaN();
        }
        mse_sum += ss_res / static_cast<double>(n);
        ss_res_total += ss_res;
        ss_tot_total += ss_tot;
        table.overall_max = std::max(table.overall_max, m.max_abs_err);
    }
    table.overall_rmse = std::sqrt(mse_sum / static_cast<double>(cols));
    if (ss_tot_total > 0.0) {
        table.overall_r2 = 1.0 - ss_res_total / ss_tot_total;
    } else {
        table.overall_r2_defined = false;
        table.overall_r2 = std::numeric_limits<double>::quiet_NaN();
    }

    if (cols % 3 == 0) {
        const auto points = cols / 3;
        for (Eigen::Index p = 0; p < points; ++p) {
            double mse = 0.0;
            for (Eigen::Index k = 0; k < 3; ++k) {
                double rmse = table.per_output[static_cast<size_t>(3 * p + k)].rmse;
                mse += rmse * rmse;
            }
            table.per_point_rmse.push_back(std::sqrt(mse / 3.0));
        }
    }
    return table;
}

RmseReduction rmse_reduction(const MetricsTable& baseline, const MetricsTable& candidate) {
    if (baseline.per_output.size() != candidate.per_output.size() ||
        baseline.per_point_rmse.size() != candidate.per_point_rmse.size())
        throw_data("rmse_reduction: table shape mismatch");
    RmseReduction red;
    for (size_t p = 0; p < baseline.per_point_rmse.size(); ++p) {
        if (baseline.per_point_rmse[p] == 0.0) throw_data("rmse_reduction: zero baseline RMSE");
        red.per_point_pct.push_back(
            100.0 * (baseline.per_point_rmse[p] - candidate.per_point_rmse[p]) /
            baseline.per_point_rmse[p]);
    }
    if (baseline.overall_rmse == 0.0) throw_data("rmse_reduction: zero baseline RMSE");
    red.overall_pct = 100.0 * (baseline.overall_rmse - candidate.overall_rmse) / baseline.overall_rmse;
    return red;
}

Histogram error_histogram(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth, int bins,
                          std::optional<std::pair<double, double>> range) {
    check_same_shape(pred, truth);
    if (bins < 1) throw_data("histogram: need at least one bin");

    Eigen::MatrixXd err = pred - truth;
    Histogram h;
    if (range) {
        h.lo = range->first;
        h.hi = range->second;
        if (!(h.hi > h.lo)) throw_data("histogram: empty range");
    } else {
        double m = err.cwiseAbs().maxCoeff();
        if (m == 0.0) m = 1.0;  // all-zero errors still need a well-formed axis
        h.lo = -m;
        h.hi = m;
    }
    h.edges.resize(static_cast<size_t>(bins) + 1);
    for (int i = 0; i <= bins; ++i)
        h.edges[static_cast<size_t>(i)] = h.lo + (h.hi - h.lo) * i / static_cast<double>(bins);

    const double width = (h.hi - h.lo) / static_cast<double>(bins);
    h.counts.assign(static_cast<size_t>(err.cols()), std::vector<int64_t>(static_cast<size_t>(bins), 0));
    for (Eigen::Index c = 0; c < err.cols(); ++c) {
        for (Eigen::Index r = 0; r < err.rows(); ++r) {
            double v = err(r, c);
            if (v < h.lo || v > h.hi) continue;  // out of range: dropped
            auto idx = static_cast<int>((v - h.lo) / width);
            idx = std::clamp(idx, 0, bins - 1);  // hi lands in the last (closed) bin
            ++h.counts[static_cast<size_t>(c)][static_cast<size_t>(idx)];
        }
    }
    return h;
}

std::vector<double> per_sample_total_errors(const Eigen::MatrixXd& pred,
                                            const Eigen::MatrixXd& truth) {
    check_same_shape(pred, truth);
    std::vector<double> out(static_cast<size_t>(pred.rows()));
    for (Eigen::Index r = 0; r < pred.rows(); ++r)
        out[static_cast<size_t>(r)] = (pred.row(r) - truth.row(r)).squaredNorm();
    return out;
}

// ---- distributions ----------------------------------------------------

namespace {

// continued fraction for the regularized incomplete beta (Lentz)
double incbeta_cf(double x, double a, double b) {
    const double tiny = 1e-300;
    double c = 1.0;
    double d = 1.0 - (a + b) * x / (a + 1.0);
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double f = d;
    for (int m = 1; m <= 300; ++m) {
        const double dm = static_cast<double>(m);
        double num = dm * (b - dm) * x / ((a + 2.0 * dm - 1.0) * (a + 2.0 * dm));
        d = 1.0 + num * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + num / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        f *= c * d;

        num = -(a + dm) * (a + b + dm) * x / ((a + 2.0 * dm) * (a + 2.0 * dm + 1.0));
        d = 1.0 + num * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + num / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double mult = c * d;
        f *= mult;
        if (std::abs(mult - 1.0) < 1e-15) break;
    }
    return f;
}

}  // namespace

double regularized_incomplete_beta(double x, double a, double b) {
    if (!(x >= 0.0 && x <= 1.0 && a > 0.0 && b > 0.0)) return std::nan("");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double ln_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    if (x < (a + 1.0) / (a + b + 2.0)) return std::exp(ln_front) * incbeta_cf(x, a, b) / a;
    return 1.0 - std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + b * std::log1p(-x) +
                          a * std::log(x)) *
                     incbeta_cf(1.0 - x, b, a) / b;
}

double students_t_cdf(double t, double df) {
    if (!(df > 0.0)) return std::nan("");
    const double x = df / (t * t + df);
    const double half_tail = 0.5 * regularized_incomplete_beta(x, 0.5 * df, 0.5);
    return t >= 0.0 ? 1.0 - half_tail : half_tail;
}

double f_cdf(double x, double d1, double d2) {
    if (!(d1 > 0.0 && d2 > 0.0)) return std::nan("");
    if (x <= 0.0) return 0.0;
    return regularized_incomplete_beta(d1 * x / (d1 * x + d2), 0.5 * d1, 0.5 * d2);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// ---- tests -------------------------------------------------------------

WelchResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2) throw_data("welch: need at least 2 samples per group");
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double ma = sample_mean(a), mb = sample_mean(b);
    const double va = sample_variance(a, ma), vb = sample_variance(b, mb);
    const double sa = va / na, sb = vb / nb;
    if (sa + sb == 0.0) {
        // identical constants: no evidence of difference
        return {0.0, na + nb - 2.0, 1.0};
    }
    WelchResult res;
    res.t = (ma - mb) / std::sqrt(sa + sb);
    res.df = (sa + sb) * (sa + sb) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    res.p = 2.0 * students_t_cdf(-std::abs(res.t), res.df);
    return res;
}

LeveneResult levene_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2) throw_data("levene: need at least 2 samples per group");
    const double ma = sample_mean(a), mb = sample_mean(b);
    std::vector<double> za(a.size()), zb(b.size());
    for (size_t i = 0; i < a.size(); ++i) za[i] = std::abs(a[i] - ma);
    for (size_t i = 0; i < b.size(); ++i) zb[i] = std::abs(b[i] - mb);

    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double mza = sample_mean(za), mzb = sample_mean(zb);
    const double mz = (na * mza + nb * mzb) / (na + nb);

    double between = na * (mza - mz) * (mza - mz) + nb * (mzb - mz) * (mzb - mz);
    double within = 0.0;
    for (double z : za) within += (z - mza) * (z - mza);
    for (double z : zb) within += (z - mzb) * (z - mzb);
    if (within == 0.0) throw_data("levene: zero within-group variance of the centered deviations");

    LeveneResult res;
    const double k = 2.0;
    res.w = (na + nb - k) / (k - 1.0) * between / within;
    res.p = 1.0 - f_cdf(res.w, k - 1.0, na + nb - k);
    return res;
}

double lilliefors_statistic(const std::vector<double>& sample) {
    if (sample.size() < 4) throw_data("lilliefors: need at least 4 samples");
    const double mean = sample_mean(sample);
    const double sd = std::sqrt(sample_variance(sample, mean));
    if (sd == 0.0) throw_data("lilliefors: constant sample");

    std::vector<double> sorted = sample;
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (size_t i = 0; i < sorted.size(); ++i) {
        const double z = normal_cdf((sorted[i] - mean) / sd);
        const double upper = static_cast<double>(i + 1) / n - z;
        const double lower = z - static_cast<double>(i) / n;
        d = std::max({d, upper, lower});
    }
    return d;
}

LillieforsResult lilliefors_test(const std::vector<double>& sample, int n_mc, uint64_t seed) {
    if (n_mc < 1) throw_data("lilliefors: need at least one resample");
    LillieforsResult res;
    res.d = lilliefors_statistic(sample);

    const size_t n = sample.size();
    const unsigned workers = worker_count(static_cast<size_t>(n_mc));
    std::vector<int64_t> exceed(workers, 0);
    const int chunk = (n_mc + static_cast<int>(workers) - 1) / static_cast<int>(workers);
    parallel_for(workers, [&](size_t w) {
        const int lo = static_cast<int>(w) * chunk;
        const int hi = std::min(n_mc, lo + chunk);
        std::vector<double> draw(n);
        for (int rep = lo; rep < hi; ++rep) {
            Rng rng(derive_seed(seed, "lilliefors", static_cast<uint64_t>(rep)));
            for (auto& v : draw) v = rng.normal();
            if (lilliefors_statistic(draw) >= res.d) ++exceed[w];
        }
    });
    int64_t total = 0;
    for (int64_t e : exceed) total += e;
    res.p = (1.0 + static_cast<double>(total)) / (static_cast<double>(n_mc) + 1.0);
    return res;
}

ComparisonReport compare_models(const std::vector<double>& errs_a, const std::vector<double>& errs_b,
                                int n_mc, uint64_t seed) {
    if (errs_a.size() < 8 || errs_b.size() < 8)
        throw_data("compare_models: need at least 8 samples per model");
    ComparisonReport rep;
    rep.n_a = errs_a.size();
    rep.n_b = errs_b.size();
    rep.mean_a = sample_mean(errs_a);
    rep.mean_b = sample_mean(errs_b);
    rep.sd_a = std::sqrt(sample_variance(errs_a, rep.mean_a));
    rep.sd_b = std::sqrt(sample_variance(errs_b, rep.mean_b));
    rep.lilliefors_a = lilliefors_test(errs_a, n_mc, derive_seed(seed, "mc", 0));
    rep.lilliefors_b = lilliefors_test(errs_b, n_mc, derive_seed(seed, "mc", 1));
    rep.levene = levene_test(errs_a, errs_b);
    rep.welch = welch_t_test(errs_a, errs_b);
    return rep;
}

double pearson_r(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) throw_data("pearson: size mismatch or too small");
    const double ma = sample_mean(a), mb = sample_mean(b);
    double num = 0.0, da = 0.0, db = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - ma) * (b[i] - mb);
        da += (a[i] - ma) * (a[i] - ma);
        db += (b[i] - mb) * (b[i] - mb);
    }
    if (da == 0.0 || db == 0.0) throw_data("pearson: constant input");
    return num / std::sqrt(da * db);
}

}  // namespace magshape::stats
