#include "magshape/learn/net.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "magshape/core/error.hpp"
#include "magshape/core/parallel.hpp"
#include "magshape/core/rng.hpp"

namespace magshape::learn {

namespace {

// flat parameter offsets: per layer, row-major weights then the bias
std::vector<int> layer_offsets(const std::vector<int>& sizes) {
    std::vector<int> off(sizes.size());  // off[l] for layer l in 1..L
    int acc = 0;
    for (size_t l = 1; l < sizes.size(); ++l) {
        off[l] = acc;
        acc += sizes[l] * (sizes[l - 1] + 1);
    }
    off[0] = acc;  // total stashed in slot 0
    return off;
}

}  // namespace

int NetModel::n_params() const { return layer_offsets(layer_sizes)[0]; }

Eigen::VectorXd NetModel::params() const {
    Eigen::VectorXd p(n_params());
    int pos = 0;
    for (size_t l = 0; l < weights.size(); ++l) {
        const auto& w = weights[l];
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            for (Eigen::Index j = 0; j < w.cols(); ++j) p(pos++) = w(i, j);
        for (Eigen::Index i = 0; i < biases[l].size(); ++i) p(pos++) = biases[l](i);
    }
    return p;
}

void NetModel::set_params(const Eigen::VectorXd& p) {
    if (p.size() != n_params()) throw_data("net: parameter vector size mismatch");
    int pos = 0;
    for (size_t l = 0; l < weights.size(); ++l) {
        auto& w = weights[l];
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = p(pos++);
        for (Eigen::Index i = 0; i < biases[l].size(); ++i) biases[l](i) = p(pos++);
    }
}

Eigen::MatrixXd NetModel::forward(const Eigen::MatrixXd& x_norm) const {
    Eigen::MatrixXd a = x_norm;
    for (size_t l = 0; l < weights.size(); ++l) {
        Eigen::MatrixXd z = a * weights[l].transpose();
        z.rowwise() += biases[l].transpose();
        if (l + 1 < weights.size())
            a = z.array().tanh();
        else
            a = std::move(z);  // identity output
    }
    return a;
}

Eigen::MatrixXd NetModel::predict(const Eigen::MatrixXd& features) const {
    return normalizer.denormalize_targets(forward(normalizer.normalize_features(features)));
}

Eigen::VectorXd NetModel::predict(const Eigen::RowVectorXd& features) const {
    return predict(Eigen::MatrixXd(features)).row(0).transpose();
}

NetModel make_net(const std::vector<int>& layer_sizes, uint64_t seed) {
    if (layer_sizes.size() < 2) throw_data("net: need at least input and output layers");
    for (int s : layer_sizes)
        if (s < 1) throw_data("net: layer sizes must be positive");
    NetModel net;
    net.layer_sizes = layer_sizes;
    for (size_t l = 1; l < layer_sizes.size(); ++l) {
        Rng rng(derive_seed(seed, "init", static_cast<uint64_t>(l)));
        const int in = layer_sizes[l - 1], out = layer_sizes[l];
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        Eigen::MatrixXd w(out, in);
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = rng.uniform(-bound, bound);
        net.weights.push_back(std::move(w));
        net.biases.push_back(Eigen::VectorXd::Zero(out));
    }
    return net;
}

GaussNewtonAccum accumulate_gauss_newton(const NetModel& net, const Eigen::MatrixXd& x_norm,
                                         const Eigen::MatrixXd& y_norm) {
    const auto n = x_norm.rows();
    const int n_out = net.layer_sizes.back();
    const int n_par = net.n_params();
    const auto offsets = layer_offsets(net.layer_sizes);
    const size_t n_layers = net.weights.size();

    const unsigned workers = worker_count(static_cast<size_t>(n));
    const Eigen::Index block_rows = 256;  // samples per Jacobian block

    std::vector<Eigen::MatrixXd> jtj_parts(workers, Eigen::MatrixXd::Zero(n_par, n_par));
    std::vector<Eigen::VectorXd> jtr_parts(workers, Eigen::VectorXd::Zero(n_par));
    std::vector<double> sse_parts(workers, 0.0);

    const Eigen::Index chunk = (n + workers - 1) / workers;
    parallel_for(workers, [&](size_t w) {
        const Eigen::Index lo = static_cast<Eigen::Index>(w) * chunk;
        const Eigen::Index hi = std::min<Eigen::Index>(n, lo + chunk);
        if (lo >= hi) return;

        Eigen::MatrixXd jac(block_rows * n_out, n_par);
        Eigen::VectorXd res(block_rows * n_out);
        std::vector<Eigen::MatrixXd> acts(n_layers + 1);
        Eigen::MatrixXd delta;

        for (Eigen::Index b0 = lo; b0 < hi; b0 += block_rows) {
            const Eigen::Index bn = std::min(block_rows, hi - b0);

            // forward pass over the block, keeping every activation
            acts[0] = x_norm.middleRows(b0, bn);
            for (size_t l = 0; l < n_layers; ++l) {
                Eigen::MatrixXd z = acts[l] * net.weights[l].transpose();
                z.rowwise() += net.biases[l].transpose();
                acts[l + 1] = (l + 1 < n_layers) ? z.array().tanh().matrix() : z;
            }

            // residuals r = y - f(x)
            for (Eigen::Index s = 0; s < bn; ++s)
                res.segment(s * n_out, n_out) =
                    (y_norm.row(b0 + s) - acts[n_layers].row(s)).transpose();

            // backprop the full 12 x layer Jacobian per sample
            for (Eigen::Index s = 0; s < bn; ++s) {
                delta = Eigen::MatrixXd::Identity(n_out, n_out);  // d out / d z_L
                for (size_t l = n_layers; l-- > 0;) {
                    const int in = net.layer_sizes[l];
                    const int out = net.layer_sizes[l + 1];
                    const int off = offsets[l + 1];
                    const auto a_prev = acts[l].row(s);
                    for (int k = 0; k < n_out; ++k) {
                        auto row = jac.row(s * n_out + k);
                        for (int i = 0; i < out; ++i)
                            row.segment(off + i * in, in) = delta(k, i) * a_prev;
                        row.segment(off + out * in, out) = delta.row(k);
                    }
                    if (l > 0) {
                        // d z_l / d z_{l-1} through the tanh of layer l-1
                        delta = (delta * net.weights[l]).eval();
                        delta.array().rowwise() *=
                            (1.0 - acts[l].row(s).array().square());
                    }
                }
            }

            auto jac_block = jac.topRows(bn * n_out);
            auto res_block = res.head(bn * n_out);
            jtj_parts[w].selfadjointView<Eigen::Lower>().rankUpdate(jac_block.transpose(), 1.0);
            jtr_parts[w].noalias() += jac_block.transpose() * res_block;
            sse_parts[w] += res_block.squaredNorm();
        }
    });

    GaussNewtonAccum acc;
    acc.jtj = Eigen::MatrixXd::Zero(n_par, n_par);
    acc.jtr = Eigen::VectorXd::Zero(n_par);
    for (unsigned w = 0; w < workers; ++w) {  // fixed-order reduction
        acc.jtj += jtj_parts[w];
        acc.jtr += jtr_parts[w];
        acc.sse += sse_parts[w];
    }
    // mirror the accumulated lower triangle
    acc.jtj.triangularView<Eigen::StrictlyUpper>() =
        acc.jtj.transpose().triangularView<Eigen::StrictlyUpper>();
    return acc;
}

NetModel train_net_lm(const Dataset& data, const NetConfig& config, uint64_t seed) {
    data.validate();
    if (config.mu0 <= 0 || config.mu_up <= 1 || config.mu_down <= 1)
        throw_data("net config: mu0 > 0 and mu factors > 1 required");

    const auto train_rows = data.rows_with(Split::Train);
    auto val_rows = data.rows_with(Split::Val);
    if (train_rows.size() < 2) throw_data("net: need at least 2 training rows");
    const bool has_val = !val_rows.empty();

    Dataset train = data.subset(train_rows);
    Dataset val = has_val ? data.subset(val_rows) : Dataset{};

    std::vector<int> sizes;
    sizes.push_back(static_cast<int>(data.features.cols()));
    for (int h : config.hidden) sizes.push_back(h);
    sizes.push_back(static_cast<int>(data.targets.cols()));

    NetModel net = make_net(sizes, seed);
    net.normalizer = Normalizer::fit(train.features, config.target_scale_mm);

    const Eigen::MatrixXd x = net.normalizer.normalize_features(train.features);
    const Eigen::MatrixXd y = net.normalizer.normalize_targets(train.targets);
    Eigen::MatrixXd xv, yv;
    if (has_val) {
        xv = net.normalizer.normalize_features(val.features);
        yv = net.normalizer.normalize_targets(val.targets);
    }
    const double n_train_terms = static_cast<double>(x.rows()) * static_cast<double>(y.cols());

    auto mse_on = [&](const Eigen::MatrixXd& xs, const Eigen::MatrixXd& ys) {
        return (ys - net.forward(xs)).squaredNorm() /
               (static_cast<double>(xs.rows()) * static_cast<double>(ys.cols()));
    };

    double mu = config.mu0;
    Eigen::VectorXd best_params = net.params();
    double best_val = has_val ? mse_on(xv, yv) : std::numeric_limits<double>::infinity();
    int stall = 0;

    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        GaussNewtonAccum acc = accumulate_gauss_newton(net, x, y);
        if (!std::isfinite(acc.sse)) {
            std::ostringstream state;
            state << "net: non-finite training loss at epoch " << epoch << ", mu=" << mu
                  << ", |params|=" << net.params().norm();
            throw_numeric(state.str());
        }

        const Eigen::VectorXd current = net.params();
        bool accepted = false;
        while (mu <= config.mu_max) {
            Eigen::MatrixXd damped = acc.jtj;
            damped.diagonal().array() += mu;
            Eigen::LLT<Eigen::MatrixXd> llt(damped);
            if (llt.info() != Eigen::Success) {
                std::ostringstream state;
                state << "net: damped normal equations not positive definite at mu=" << mu;
                throw_numeric(state.str());
            }
            Eigen::VectorXd step = llt.solve(acc.jtr);
            net.set_params(current + step);
            double sse_new = (y - net.forward(x)).squaredNorm();
            if (std::isfinite(sse_new) && sse_new < acc.sse) {
                accepted = true;
                mu = std::max(mu / config.mu_down, 1e-20);
                net.train_mse_trace.push_back(sse_new / n_train_terms);
                break;
            }
            mu *= config.mu_up;
        }
        if (!accepted) {
            net.set_params(current);  // no productive step left at mu_max
            break;
        }

        if (has_val) {
            double vmse = mse_on(xv, yv);
            net.val_mse_trace.push_back(vmse);
            if (vmse < best_val) {
                best_val = vmse;
                best_params = net.params();
                stall = 0;
            } else if (++stall >= config.patience) {
                break;
            }
        } else {
            best_params = net.params();
        }
    }

    if (has_val) net.set_params(best_params);
    return net;
}

}  // namespace magshape::learn
