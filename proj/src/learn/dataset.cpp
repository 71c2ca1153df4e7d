#include "magshape/learn/dataset.hpp"

#include <cmath>
#include <numeric>

#include "magshape/core/error.hpp"
#include "magshape/core/rng.hpp"

namespace magshape::learn {

const std::array<const char*, 5> Dataset::kFeatureNames = {"bx_mT", "by_mT", "bmag_mT", "freq_Hz",
                                                           "dist_mm"};
const std::array<const char*, 12> Dataset::kTargetNames = {"p0x", "p0y", "p0z", "p1x", "p1y", "p1z",
                                                           "p2x", "p2y", "p2z", "p3x", "p3y", "p3z"};

std::vector<int> Dataset::rows_with(Split s) const {
    std::vector<int> out;
    for (size_t i = 0; i < split.size(); ++i)
        if (split[i] == s) out.push_back(static_cast<int>(i));
    return out;
}

std::vector<int> Dataset::rows_not(Split s) const {
    std::vector<int> out;
    for (size_t i = 0; i < split.size(); ++i)
        if (split[i] != s) out.push_back(static_cast<int>(i));
    return out;
}

Dataset Dataset::subset(const std::vector<int>& rows) const {
    Dataset out;
    out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
    out.targets.resize(static_cast<Eigen::Index>(rows.size()), targets.cols());
    out.split.resize(rows.size(), Split::Train);
    for (size_t i = 0; i < rows.size(); ++i) {
        out.features.row(static_cast<Eigen::Index>(i)) = features.row(rows[i]);
        out.targets.row(static_cast<Eigen::Index>(i)) = targets.row(rows[i]);
        if (!split.empty()) out.split[i] = split[static_cast<size_t>(rows[i])];
    }
    return out;
}

void Dataset::validate() const {
    if (features.rows() != targets.rows()) throw_data("dataset: feature/target row mismatch");
    if (features.cols() != kNumFeatures) throw_data("dataset: expected 5 feature columns");
    if (targets.cols() != kNumTargets) throw_data("dataset: expected 12 target columns");
    if (!features.allFinite() || !targets.allFinite()) throw_data("dataset: non-finite entries");
    if (!split.empty() && split.size() != static_cast<size_t>(features.rows()))
        throw_data("dataset: split label count mismatch");
}

void assign_splits(Dataset& data, const SplitRatios& ratios, uint64_t seed) {
    const double sum = ratios.train + ratios.val + ratios.test;
    if (std::abs(sum - 1.0) > 1e-9) throw_data("split: ratios must sum to 1");
    const auto n = static_cast<size_t>(data.rows());
    if (n == 0) throw_data("split: empty dataset");

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(seed, "split"));
    rng.shuffle(order);

    auto n_train = static_cast<size_t>(std::llround(ratios.train * static_cast<double>(n)));
    auto n_val = static_cast<size_t>(std::llround(ratios.val * static_cast<double>(n)));
    n_train = std::min(n_train, n);
    n_val = std::min(n_val, n - n_train);

    data.split.assign(n, Split::Test);
    for (size_t i = 0; i < n_train; ++i) data.split[static_cast<size_t>(order[i])] = Split::Train;
    for (size_t i = n_train; i < n_train + n_val; ++i)
        data.split[static_cast<size_t>(order[i])] = Split::Val;
}

void subsplit_train_val(Dataset& data, double val_fraction, uint64_t seed) {
    if (val_fraction < 0.0 || val_fraction >= 1.0)
        throw_data("split: validation fraction must lie in [0, 1)");
    std::vector<int> train_rows = data.rows_with(Split::Train);
    Rng rng(derive_seed(seed, "valsplit"));
    rng.shuffle(train_rows);
    auto n_val =
        static_cast<size_t>(std::llround(val_fraction * static_cast<double>(train_rows.size())));
    for (size_t i = 0; i < n_val; ++i)
        data.split[static_cast<size_t>(train_rows[i])] = Split::Val;
}

Normalizer Normalizer::fit(const Eigen::MatrixXd& features, double target_scale_mm) {
    if (features.rows() < 2) throw_data("normalizer: need at least 2 rows");
    if (target_scale_mm <= 0) throw_data("normalizer: target scale must be positive");
    Normalizer nz;
    nz.target_scale_mm = target_scale_mm;
    const auto n = static_cast<double>(features.rows());
    nz.mean = features.colwise().mean();
    nz.stddev.resize(features.cols());
    nz.constant.assign(static_cast<size_t>(features.cols()), 0);
    for (Eigen::Index c = 0; c < features.cols(); ++c) {
        double var = (features.col(c).array() - nz.mean(c)).square().sum() / (n - 1.0);
        double sd = std::sqrt(var);
        if (sd > 0.0) {
            nz.stddev(c) = sd;
        } else {
            nz.stddev(c) = 1.0;  // constant feature: passed through
            nz.constant[static_cast<size_t>(c)] = 1;
        }
    }
    return nz;
}

Eigen::MatrixXd Normalizer::normalize_features(const Eigen::MatrixXd& x) const {
    if (x.cols() != mean.size()) throw_data("normalizer: feature width mismatch");
    return (x.rowwise() - mean.transpose()).array().rowwise() / stddev.transpose().array();
}

}  // namespace magshape::learn
