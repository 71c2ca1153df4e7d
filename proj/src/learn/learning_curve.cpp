#include "magshape/learn/learning_curve.hpp"

#include <algorithm>
#include <cmath>

#include "magshape/core/error.hpp"
#include "magshape/core/rng.hpp"

namespace magshape::learn {

std::vector<LearningCurvePoint> learning_curve(const Dataset& data,
                                               const std::vector<double>& fractions, uint64_t seed,
                                               const TrainPredictFn& train_predict) {
    data.validate();
    std::vector<int> train_rows = data.rows_not(Split::Test);
    std::vector<int> test_rows = data.rows_with(Split::Test);
    if (train_rows.empty() || test_rows.empty())
        throw_data("learning curve: need both training and test rows");

    Rng rng(derive_seed(seed, "curve"));
    rng.shuffle(train_rows);

    Dataset test = data.subset(test_rows);

    std::vector<LearningCurvePoint> out;
    for (double f : fractions) {
        if (!(f > 0.0 && f <= 1.0)) throw_data("learning curve: fractions must lie in (0, 1]");
        auto k = static_cast<size_t>(
            std::ceil(f * static_cast<double>(train_rows.size()) - 1e-12));
        k = std::max<size_t>(1, std::min(k, train_rows.size()));
        std::vector<int> rows(train_rows.begin(), train_rows.begin() + static_cast<long>(k));
        std::sort(rows.begin(), rows.end());  // nested prefix, restored to dataset order

        Dataset sub = data.subset(rows);
        sub.split.assign(rows.size(), Split::Train);
        Eigen::MatrixXd pred = train_predict(sub, test.features);
        double rmse = std::sqrt((pred - test.targets).squaredNorm() /
                                static_cast<double>(pred.rows() * pred.cols()));
        out.push_back({f, static_cast<int>(k), rmse});
    }
    return out;
}

}  // namespace magshape::learn
