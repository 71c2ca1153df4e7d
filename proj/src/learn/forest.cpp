#include "magshape/learn/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "magshape/core/error.hpp"
#include "magshape/core/parallel.hpp"
#include "magshape/core/rng.hpp"

namespace magshape::learn {

double RegressionTree::predict(const Eigen::RowVectorXd& x) const {
    int i = 0;
    while (nodes[static_cast<size_t>(i)].feature >= 0) {
        const TreeNode& n = nodes[static_cast<size_t>(i)];
        i = (x(n.feature) < n.threshold) ? n.left : n.right;
    }
    return nodes[static_cast<size_t>(i)].value;
}

Eigen::VectorXd ForestModel::predict(const Eigen::RowVectorXd& x) const {
    if (x.size() != n_features) throw_data("forest: feature dimension mismatch");
    Eigen::VectorXd out(n_outputs);
    for (int o = 0; o < n_outputs; ++o) {
        double sum = 0.0;
        for (const auto& tree : forests[static_cast<size_t>(o)]) sum += tree.predict(x);
        out(o) = sum / static_cast<double>(forests[static_cast<size_t>(o)].size());
    }
    return out;
}

Eigen::MatrixXd ForestModel::predict(const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd out(x.rows(), n_outputs);
    for (Eigen::Index r = 0; r < x.rows(); ++r) out.row(r) = predict(Eigen::RowVectorXd(x.row(r))).transpose();
    return out;
}

uint64_t tree_stream_seed(uint64_t seed, int output, int tree) {
    return derive_seed(seed, "tree", static_cast<uint64_t>(output), static_cast<uint64_t>(tree));
}

std::vector<int> bootstrap_rows(Rng& rng, int n) {
    std::vector<int> out(static_cast<size_t>(n));
    for (auto& v : out) v = static_cast<int>(rng.bounded(static_cast<uint64_t>(n)));
    return out;
}

namespace {

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double cost = 0.0;       // SSE_left + SSE_right
};

struct Candidate {
    double cost;
    int feature;
    double threshold;
};

struct TreeBuilder {
    const Eigen::MatrixXd& x;        // [n_train x features]
    const Eigen::VectorXd& y;        // one output column, train rows
    int min_leaf;
    int mtry;
    Rng& rng;
    std::vector<TreeNode>& nodes;

    // rows: indices into x/y (bootstrap multiset slice)
    int build(std::vector<int>& rows, int lo, int hi) {
        const int count = hi - lo;
        double sum = 0.0, sum_sq = 0.0;
        for (int i = lo; i < hi; ++i) {
            double v = y(rows[static_cast<size_t>(i)]);
            sum += v;
            sum_sq += v * v;
        }
        const double mean = sum / count;
        const double sse = sum_sq - sum * sum / count;

        auto make_leaf = [&]() {
            nodes.push_back({-1, 0.0, -1, -1, mean});
            return static_cast<int>(nodes.size()) - 1;
        };
        // the relative term absorbs round-off on constant targets
        if (count < 2 * min_leaf || sse <= 1e-14 * sum_sq) return make_leaf();

        SplitChoice best = scan_features(rows, lo, hi, sse);
        if (!best.found) return make_leaf();

        // partition rows in place: x < threshold to the left
        int mid = lo;
        for (int i = lo; i < hi; ++i) {
            if (x(rows[static_cast<size_t>(i)], best.feature) < best.threshold) {
                std::swap(rows[static_cast<size_t>(i)], rows[static_cast<size_t>(mid)]);
                ++mid;
            }
        }

        const int self = static_cast<int>(nodes.size());
        nodes.push_back({best.feature, best.threshold, -1, -1, mean});
        const int left = build(rows, lo, mid);
        const int right = build(rows, mid, hi);
        nodes[static_cast<size_t>(self)].left = left;
        nodes[static_cast<size_t>(self)].right = right;
        return self;
    }

    SplitChoice scan_features(const std::vector<int>& rows, int lo, int hi, double parent_sse) {
        const int n_features = static_cast<int>(x.cols());
        std::vector<int> candidates(static_cast<size_t>(n_features));
        std::iota(candidates.begin(), candidates.end(), 0);
        if (mtry < n_features) {
            // partial Fisher-Yates, then ascending for deterministic tie-breaks
            for (int i = 0; i < mtry; ++i) {
                auto j = static_cast<size_t>(i) + static_cast<size_t>(rng.bounded(
                             static_cast<uint64_t>(n_features - i)));
                std::swap(candidates[static_cast<size_t>(i)], candidates[j]);
            }
            candidates.resize(static_cast<size_t>(mtry));
            std::sort(candidates.begin(), candidates.end());
        }

        const int count = hi - lo;
        std::vector<std::pair<double, double>> vals(static_cast<size_t>(count));  // (x, y)
        std::vector<Candidate> scored;
        for (int f : candidates) {
            for (int i = 0; i < count; ++i) {
                int r = rows[static_cast<size_t>(lo + i)];
                vals[static_cast<size_t>(i)] = {x(r, f), y(r)};
            }
            std::sort(vals.begin(), vals.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

            // prefix scan over split positions between distinct feature values
            double left_sum = 0.0, left_sq = 0.0;
            double total_sum = 0.0, total_sq = 0.0;
            for (const auto& [xv, yv] : vals) {
                total_sum += yv;
                total_sq += yv * yv;
            }
            for (int i = 0; i + 1 < count; ++i) {
                left_sum += vals[static_cast<size_t>(i)].second;
                left_sq += vals[static_cast<size_t>(i)].second * vals[static_cast<size_t>(i)].second;
                const int n_left = i + 1, n_right = count - n_left;
                if (n_left < min_leaf || n_right < min_leaf) continue;
                if (vals[static_cast<size_t>(i)].first == vals[static_cast<size_t>(i + 1)].first)
                    continue;  // no boundary between equal values
                const double right_sum = total_sum - left_sum;
                const double right_sq = total_sq - left_sq;
                const double cost = (left_sq - left_sum * left_sum / n_left) +
                                    (right_sq - right_sum * right_sum / n_right);
                // the midpoint of two nearly-adjacent doubles can round onto
                // the lower value, which would leave the left side empty; the
                // upper value keeps the partition at this boundary
                double threshold =
                    0.5 * (vals[static_cast<size_t>(i)].first + vals[static_cast<size_t>(i + 1)].first);
                if (!(threshold > vals[static_cast<size_t>(i)].first))
                    threshold = vals[static_cast<size_t>(i + 1)].first;
                scored.push_back({cost, f, threshold});
            }
        }
        if (scored.empty()) return {};

        // Ties are broken by lowest feature index, then smallest threshold.
        // Duplicated bootstrap rows regularly make several features induce the
        // same partition, whose costs then differ only in round-off, so the
        // tie band is relative to the parent SSE rather than exact equality.
        double min_cost = scored.front().cost;
        for (const auto& c : scored) min_cost = std::min(min_cost, c.cost);
        const double tie_tol = 1e-10 * parent_sse;
        SplitChoice best;
        for (const auto& c : scored) {  // generation order is (feature asc, threshold asc)
            if (c.cost <= min_cost + tie_tol) {
                best.found = true;
                best.feature = c.feature;
                best.threshold = c.threshold;
                best.cost = c.cost;
                break;
            }
        }
        return best;
    }
};

}  // namespace

ForestModel train_forest(const Dataset& data, const ForestConfig& config, uint64_t seed) {
    data.validate();
    if (config.trees < 1 || config.min_leaf < 1 || config.mtry < 1)
        throw_data("forest config: trees, min_leaf and mtry must be positive");

    ForestModel model;
    model.config = config;
    model.seed = seed;
    model.n_features = static_cast<int>(data.features.cols());
    model.n_outputs = static_cast<int>(data.targets.cols());
    model.train_rows = data.split.empty() ? [&] {
        std::vector<int> all(static_cast<size_t>(data.rows()));
        std::iota(all.begin(), all.end(), 0);
        return all;
    }() : data.rows_not(Split::Test);

    // a training set smaller than 2*min_leaf is allowed: every tree is then a
    // single leaf (the bootstrap mean)
    const int m = static_cast<int>(model.train_rows.size());
    if (m < 1) throw_data("forest: empty training set");

    Eigen::MatrixXd x(m, model.n_features);
    Eigen::MatrixXd y(m, model.n_outputs);
    for (int i = 0; i < m; ++i) {
        x.row(i) = data.features.row(model.train_rows[static_cast<size_t>(i)]);
        y.row(i) = data.targets.row(model.train_rows[static_cast<size_t>(i)]);
    }
    model.target_min = y.colwise().minCoeff();
    model.target_max = y.colwise().maxCoeff();

    model.forests.assign(static_cast<size_t>(model.n_outputs),
                         std::vector<RegressionTree>(static_cast<size_t>(config.trees)));

    const size_t jobs = static_cast<size_t>(model.n_outputs) * static_cast<size_t>(config.trees);
    parallel_for(jobs, [&](size_t job) {
        const int output = static_cast<int>(job) / config.trees;
        const int t = static_cast<int>(job) % config.trees;
        Rng rng(tree_stream_seed(seed, output, t));

        std::vector<int> rows = bootstrap_rows(rng, m);
        std::vector<uint8_t> in_bag(static_cast<size_t>(m), 0);
        for (int r : rows) in_bag[static_cast<size_t>(r)] = 1;

        RegressionTree& tree = model.forests[static_cast<size_t>(output)][static_cast<size_t>(t)];
        for (int r = 0; r < m; ++r)
            if (!in_bag[static_cast<size_t>(r)]) tree.oob_rows.push_back(r);

        Eigen::VectorXd yo = y.col(output);
        TreeBuilder builder{x, yo, config.min_leaf, config.mtry, rng, tree.nodes};
        tree.nodes.reserve(static_cast<size_t>(2 * m / config.min_leaf + 1));
        builder.build(rows, 0, m);
    });
    return model;
}

ImportanceResult feature_importance(const ForestModel& model, const Dataset& data, uint64_t seed) {
    data.validate();
    const int n_features = model.n_features;
    const int n_outputs = model.n_outputs;
    const int m = static_cast<int>(model.train_rows.size());
    if (m == 0) throw_data("importance: model carries no training rows");

    Eigen::MatrixXd x(m, n_features);
    Eigen::MatrixXd y(m, n_outputs);
    for (int i = 0; i < m; ++i) {
        if (model.train_rows[static_cast<size_t>(i)] >= data.rows())
            throw_data("importance: model/dataset row mismatch");
        x.row(i) = data.features.row(model.train_rows[static_cast<size_t>(i)]);
        y.row(i) = data.targets.row(model.train_rows[static_cast<size_t>(i)]);
    }

    ImportanceResult res;
    res.permutation_pct = Eigen::MatrixXd::Zero(n_outputs, n_features);
    res.impurity_pct = Eigen::MatrixXd::Zero(n_outputs, n_features);
    res.degenerate.assign(static_cast<size_t>(n_outputs), 0);

    parallel_for(static_cast<size_t>(n_outputs), [&](size_t output) {
        Eigen::VectorXd raw = Eigen::VectorXd::Zero(n_features);
        const auto& trees = model.forests[output];

        for (size_t t = 0; t < trees.size(); ++t) {
            const RegressionTree& tree = trees[t];
            if (tree.oob_rows.empty()) throw_data("importance: tree has no out-of-bag rows");
            const auto n_oob = static_cast<int>(tree.oob_rows.size());

            double base_mse = 0.0;
            for (int r : tree.oob_rows) {
                double e = tree.predict(x.row(r)) - y(r, static_cast<Eigen::Index>(output));
                base_mse += e * e;
            }
            base_mse /= n_oob;

            for (int f = 0; f < n_features; ++f) {
                Rng rng(derive_seed(seed, "permute",
                                    (static_cast<uint64_t>(output) << 32) | static_cast<uint64_t>(t),
                                    static_cast<uint64_t>(f)));
                std::vector<int> perm = tree.oob_rows;
                rng.shuffle(perm);
                double mse = 0.0;
                Eigen::RowVectorXd probe(n_features);
                for (int i = 0; i < n_oob; ++i) {
                    probe = x.row(tree.oob_rows[static_cast<size_t>(i)]);
                    probe(f) = x(perm[static_cast<size_t>(i)], f);
                    double e = tree.predict(probe) - y(tree.oob_rows[static_cast<size_t>(i)],
                                                       static_cast<Eigen::Index>(output));
                    mse += e * e;
                }
                mse /= n_oob;
                raw(f) += mse - base_mse;
            }
        }
        raw /= static_cast<double>(trees.size());
        raw = raw.cwiseMax(0.0);

        double total = raw.sum();
        if (total > 0.0) {
            res.permutation_pct.row(static_cast<Eigen::Index>(output)) = 100.0 * raw.transpose() / total;
        } else {
            res.degenerate[output] = 1;
        }
    });

    // Impurity shares are reconstructed by replaying each tree's bootstrap
    // rows down its splits and re-measuring the SSE drop per node. This keeps
    // the model file free of training-time bookkeeping.
    parallel_for(static_cast<size_t>(n_outputs), [&](size_t output) {
        Eigen::VectorXd gain = Eigen::VectorXd::Zero(n_features);
        for (size_t t = 0; t < model.forests[output].size(); ++t) {
            const RegressionTree& tree = model.forests[output][t];
            std::vector<std::vector<int>> node_rows(tree.nodes.size());
            Rng rng(tree_stream_seed(model.seed, static_cast<int>(output), static_cast<int>(t)));
            std::vector<int> rows = bootstrap_rows(rng, m);
            for (int r : rows) {
                int i = 0;
                for (;;) {
                    node_rows[static_cast<size_t>(i)].push_back(r);
                    const TreeNode& n = tree.nodes[static_cast<size_t>(i)];
                    if (n.feature < 0) break;
                    i = (x(r, n.feature) < n.threshold) ? n.left : n.right;
                }
            }
            auto sse_of = [&](const std::vector<int>& rs) {
                double sum = 0.0, sq = 0.0;
                for (int r : rs) {
                    double v = y(r, static_cast<Eigen::Index>(output));
                    sum += v;
                    sq += v * v;
                }
                return rs.empty() ? 0.0 : sq - sum * sum / static_cast<double>(rs.size());
            };
            for (size_t ni = 0; ni < tree.nodes.size(); ++ni) {
                const TreeNode& n = tree.nodes[ni];
                if (n.feature < 0) continue;
                double g = sse_of(node_rows[ni]) - sse_of(node_rows[static_cast<size_t>(n.left)]) -
                           sse_of(node_rows[static_cast<size_t>(n.right)]);
                gain(n.feature) += g;
            }
        }
        double total = gain.sum();
        if (total > 0.0)
            res.impurity_pct.row(static_cast<Eigen::Index>(output)) = 100.0 * gain.transpose() / total;
    });

    return res;
}

}  // namespace magshape::learn
