#include <doctest.h>

#include "magshape/core/error.hpp"
#include "magshape/core/rng.hpp"
#include "magshape/learn/dataset.hpp"

using namespace magshape;
using learn::Dataset;
using learn::Split;

namespace {
Dataset random_dataset(int n, uint64_t seed) {
    Rng rng(seed);
    Dataset d;
    d.features.resize(n, Dataset::kNumFeatures);
    d.targets.resize(n, Dataset::kNumTargets);
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = 0; c < d.features.cols(); ++c) d.features(r, c) = rng.uniform(-1, 1);
        for (Eigen::Index c = 0; c < d.targets.cols(); ++c) d.targets(r, c) = rng.uniform(-1, 1);
    }
    d.split.assign(static_cast<size_t>(n), Split::Train);
    return d;
}
}  // namespace

TEST_CASE("split: 80/20 shares land within one row") {
    auto d = random_dataset(5000, 1);
    learn::assign_splits(d, {0.8, 0.0, 0.2}, 42);
    auto train = d.rows_with(Split::Train).size();
    auto test = d.rows_with(Split::Test).size();
    CHECK(train + test == 5000);
    CHECK(std::abs(static_cast<long>(train) - 4000L) <= 1);
    CHECK(std::abs(static_cast<long>(test) - 1000L) <= 1);
}

TEST_CASE("split: all-train ratios") {
    auto d = random_dataset(100, 2);
    learn::assign_splits(d, {1.0, 0.0, 0.0}, 7);
    CHECK(d.rows_with(Split::Train).size() == 100);
}

TEST_CASE("split: deterministic for a fixed seed") {
    auto a = random_dataset(500, 3);
    auto b = random_dataset(500, 3);
    learn::assign_splits(a, {0.8, 0.0, 0.2}, 9);
    learn::assign_splits(b, {0.8, 0.0, 0.2}, 9);
    CHECK(a.split == b.split);
    learn::assign_splits(b, {0.8, 0.0, 0.2}, 10);
    CHECK(a.split != b.split);
}

TEST_CASE("split: ratios must sum to one, dataset must be non-empty") {
    auto d = random_dataset(10, 4);
    CHECK_THROWS_AS(learn::assign_splits(d, {0.5, 0.0, 0.2}, 1), Error);
    Dataset empty;
    empty.features.resize(0, Dataset::kNumFeatures);
    empty.targets.resize(0, Dataset::kNumTargets);
    CHECK_THROWS_AS(learn::assign_splits(empty, {0.8, 0.0, 0.2}, 1), Error);
}

TEST_CASE("subsplit: carves validation only out of the train share") {
    auto d = random_dataset(1000, 5);
    learn::assign_splits(d, {0.8, 0.0, 0.2}, 11);
    auto test_before = d.rows_with(Split::Test);
    learn::subsplit_train_val(d, 0.15, 11);
    CHECK(d.rows_with(Split::Test) == test_before);
    auto val = d.rows_with(Split::Val).size();
    CHECK(std::abs(static_cast<long>(val) - 120L) <= 1);  // 15% of 800
}

TEST_CASE("normalizer: round trip and constant-feature flag") {
    auto d = random_dataset(200, 6);
    d.features.col(4).setConstant(90.0);  // constant feature
    auto nz = learn::Normalizer::fit(d.features, 40.0);
    CHECK(nz.constant[4] == 1);
    CHECK(nz.stddev(4) == 1.0);

    auto x = nz.normalize_features(d.features);
    CHECK(std::abs(x.col(0).mean()) < 1e-12);
    // constant column passes through mean-centered only
    CHECK((x.col(4).array() - 0.0).abs().maxCoeff() < 1e-12);

    auto y = nz.normalize_targets(d.targets);
    CHECK((nz.denormalize_targets(y) - d.targets).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("dataset validation rejects NaN and shape mismatches") {
    auto d = random_dataset(10, 7);
    d.targets(3, 3) = std::nan("");
    CHECK_THROWS_AS(d.validate(), Error);
}
