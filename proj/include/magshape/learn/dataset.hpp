#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <vector>

namespace magshape::learn {

enum class Split : uint8_t { Train, Val, Test };

// Feature rows (bx, by, |b|, f, d_tip) against 12 control-point coordinates.
struct Dataset {
    Eigen::MatrixXd features;   // [n x 5]
    Eigen::MatrixXd targets;    // [n x 12]
    std::vector<Split> split;   // n entries; defaults to Train

    static constexpr int kNumFeatures = 5;
    static constexpr int kNumTargets = 12;
    static const std::array<const char*, 5> kFeatureNames;
    static const std::array<const char*, 12> kTargetNames;

    Eigen::Index rows() const { return features.rows(); }
    std::vector<int> rows_with(Split s) const;
    std::vector<int> rows_not(Split s) const;
    Dataset subset(const std::vector<int>& rows) const;

    void validate() const;  // dims, finiteness, split size
};

struct SplitRatios {
    double train = 0.8;
    double val = 0.0;
    double test = 0.2;
};

// Seeded random assignment. Counts are the rounded ratio shares, so a 5000
// row set at 80/20 lands within one row of 4000/1000.
void assign_splits(Dataset& data, const SplitRatios& ratios, uint64_t seed);

// Carve a validation share out of the current Train rows (the Test rows stay
// untouched, so models compared later share the same test set).
void subsplit_train_val(Dataset& data, double val_fraction, uint64_t seed);

// Per-feature z-scoring plus a fixed target scale (the robot length).
// Constant features are flagged and passed through unscaled.
struct Normalizer {
    Eigen::VectorXd mean;
    Eigen::VectorXd stddev;
    std::vector<uint8_t> constant;
    double target_scale_mm = 40.0;

    static Normalizer fit(const Eigen::MatrixXd& features, double target_scale_mm);

    Eigen::MatrixXd normalize_features(const Eigen::MatrixXd& x) const;
    Eigen::MatrixXd normalize_targets(const Eigen::MatrixXd& y) const { return y / target_scale_mm; }
    Eigen::MatrixXd denormalize_targets(const Eigen::MatrixXd& y) const { return y * target_scale_mm; }
};

}  // namespace magshape::learn
