#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace magshape::stats {

struct OutputMetrics {
    double rmse = 0.0;
    double r2 = 0.0;
    bool r2_defined = true;  // false when the truth column has zero variance
    double max_abs_err = 0.0;
};

struct MetricsTable {
    std::vector<OutputMetrics> per_output;
    std::vector<double> per_point_rmse;  // RMS over each control point's 3 columns (12-column case)
    double overall_rmse = 0.0;
    double overall_r2 = 0.0;  // pooled over columns (variance-weighted)
    bool overall_r2_defined = true;
    double overall_max = 0.0;
};

// Column-wise RMSE / R^2 / max |error|; R^2 uses the standard coefficient of
// determination with SStot about the truth column mean.
MetricsTable compute_metrics(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth);

struct RmseReduction {
    std::vector<double> per_point_pct;
    double overall_pct = 0.0;
};

// 100 * (rmse_baseline - rmse_candidate) / rmse_baseline
RmseReduction rmse_reduction(const MetricsTable& baseline, const MetricsTable& candidate);

struct Histogram {
    double lo = 0.0, hi = 0.0;
    std::vector<double> edges;                     // bins + 1 entries
    std::vector<std::vector<int64_t>> counts;      // per output column
};

// Signed errors pred - truth binned uniformly over the given range (default:
// symmetric about zero covering the largest magnitude). Half-open bins, the
// last bin closed.
Histogram error_histogram(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth, int bins,
                          std::optional<std::pair<double, double>> range = std::nullopt);

// sum over the 12 outputs of squared error, per sample
std::vector<double> per_sample_total_errors(const Eigen::MatrixXd& pred,
                                            const Eigen::MatrixXd& truth);

struct WelchResult {
    double t = 0.0;
    double df = 0.0;
    double p = 0.0;  // two-sided
};

WelchResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b);

struct LeveneResult {
    double w = 0.0;
    double p = 0.0;
};

// classic mean-centered Levene test for equal variances (two groups)
LeveneResult levene_test(const std::vector<double>& a, const std::vector<double>& b);

// Kolmogorov-Smirnov distance against the normal fitted by sample mean/SD
double lilliefors_statistic(const std::vector<double>& sample);

struct LillieforsResult {
    double d = 0.0;
    double p = 0.0;  // Monte Carlo, (1 + #{D* >= D}) / (n_mc + 1)
};

LillieforsResult lilliefors_test(const std::vector<double>& sample, int n_mc, uint64_t seed);

struct ComparisonReport {
    size_t n_a = 0, n_b = 0;
    double mean_a = 0.0, sd_a = 0.0;
    double mean_b = 0.0, sd_b = 0.0;
    LillieforsResult lilliefors_a, lilliefors_b;
    LeveneResult levene;
    WelchResult welch;
};

// The model-comparison battery over two lists of per-sample total errors:
// Lilliefors normality per model, mean-centered Levene, Welch's t.
ComparisonReport compare_models(const std::vector<double>& errs_a, const std::vector<double>& errs_b,
                                int n_mc, uint64_t seed);

// distribution building blocks
double regularized_incomplete_beta(double x, double a, double b);
double students_t_cdf(double t, double df);
double f_cdf(double x, double d1, double d2);
double normal_cdf(double z);

double pearson_r(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace magshape::stats
