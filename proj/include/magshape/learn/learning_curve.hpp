#pragma once

#include <functional>

#include "magshape/learn/dataset.hpp"

namespace magshape::learn {

struct LearningCurvePoint {
    double fraction = 0.0;
    int n_rows = 0;
    double test_rmse = 0.0;
};

// Trains on the given subset (all rows are training rows) and returns
// predictions for the passed feature matrix.
using TrainPredictFn =
    std::function<Eigen::MatrixXd(const Dataset& train_subset, const Eigen::MatrixXd& test_features)>;

// Retrains on nested subsets of the training split against a fixed test
// split. Subsets are nested via one seeded shuffle; each prefix is sorted
// back into dataset order, so the fraction-1.0 row reproduces a plain full
// train/evaluate run with the same seed.
std::vector<LearningCurvePoint> learning_curve(const Dataset& data,
                                               const std::vector<double>& fractions, uint64_t seed,
                                               const TrainPredictFn& train_predict);

}  // namespace magshape::learn
