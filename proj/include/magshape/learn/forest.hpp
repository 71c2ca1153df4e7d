#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "magshape/core/rng.hpp"
#include "magshape/learn/dataset.hpp"

namespace magshape::learn {

struct ForestConfig {
    int trees = 200;
    int min_leaf = 5;
    int mtry = 2;  // features considered per split
};

struct TreeNode {
    int feature = -1;       // -1 marks a leaf
    double threshold = 0.0; // go left when x[feature] < threshold
    int left = -1;
    int right = -1;
    double value = 0.0;     // leaf mean
};

struct RegressionTree {
    std::vector<TreeNode> nodes;
    std::vector<int> oob_rows;  // indices into the forest's training-row list

    double predict(const Eigen::RowVectorXd& x) const;
};

// 12 independent forests of CART regression trees grown on bootstrap
// resamples with a variance-reduction split criterion; split thresholds sit
// at midpoints of sorted unique feature values, nodes stop below 2*min_leaf
// rows or at zero target variance.
struct ForestModel {
    ForestConfig config;
    uint64_t seed = 0;
    int n_features = 0;
    int n_outputs = 0;
    std::vector<int> train_rows;                       // dataset rows the forest was grown on
    std::vector<std::vector<RegressionTree>> forests;  // [output][tree]
    Eigen::VectorXd target_min, target_max;            // training target range per output

    Eigen::VectorXd predict(const Eigen::RowVectorXd& x) const;
    Eigen::MatrixXd predict(const Eigen::MatrixXd& x) const;
};

// deterministic per-tree stream: bootstrap first, then node-level feature
// subsampling, all from this seed
uint64_t tree_stream_seed(uint64_t seed, int output, int tree);

// n draws with replacement from [0, n)
std::vector<int> bootstrap_rows(Rng& rng, int n);

// Grows on every row not labeled Test (Val rows carry no meaning for the
// forest). Tree growth is parallel across (output, tree) pairs and
// bit-identical for any thread count.
ForestModel train_forest(const Dataset& data, const ForestConfig& config, uint64_t seed);

// Out-of-bag permutation importance: per tree and feature, the OOB MSE
// increase after permuting that feature column, averaged over trees, floored
// at zero and normalized per output to sum 100. Impurity importance (split
// SSE reduction shares) is reported alongside under its own label.
struct ImportanceResult {
    Eigen::MatrixXd permutation_pct;  // [outputs x features]
    Eigen::MatrixXd impurity_pct;     // [outputs x features]
    std::vector<uint8_t> degenerate;  // outputs whose raw importance summed to zero
};

ImportanceResult feature_importance(const ForestModel& model, const Dataset& data, uint64_t seed);

}  // namespace magshape::learn
