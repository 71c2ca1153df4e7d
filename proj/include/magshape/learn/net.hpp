#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "magshape/learn/dataset.hpp"

namespace magshape::learn {

// Feedforward net, tanh hidden layers, identity output, trained full-batch
// with damped Gauss-Newton steps: solve (J^T J + mu I) delta = J^T r, accept
// a step when the training MSE drops (mu /= mu_down), otherwise retry with
// mu *= mu_up. Early stopping watches the validation MSE with the given
// patience. J^T J and J^T r are accumulated block-wise; the full Jacobian is
// never materialized.
struct NetConfig {
    std::vector<int> hidden = {64, 32, 16};
    double mu0 = 1e-3;
    double mu_up = 10.0;
    double mu_down = 10.0;
    double mu_max = 1e10;
    int max_epochs = 60;
    int patience = 10;
    double target_scale_mm = 40.0;  // robot length; targets are trained normalized by it
};

struct NetModel {
    std::vector<int> layer_sizes;            // input, hidden..., output
    std::vector<Eigen::MatrixXd> weights;    // per layer, [out x in]
    std::vector<Eigen::VectorXd> biases;
    Normalizer normalizer;
    std::vector<double> train_mse_trace;     // accepted epochs, normalized space
    std::vector<double> val_mse_trace;

    int n_params() const;
    Eigen::VectorXd params() const;          // flat view, layer-major, weights then bias
    void set_params(const Eigen::VectorXd& p);

    // normalized-feature space in, normalized-target space out
    Eigen::MatrixXd forward(const Eigen::MatrixXd& x_norm) const;

    // raw features in, mm targets out
    Eigen::MatrixXd predict(const Eigen::MatrixXd& features) const;
    Eigen::VectorXd predict(const Eigen::RowVectorXd& features) const;
};

NetModel make_net(const std::vector<int>& layer_sizes, uint64_t seed);

// One full pass: J^T J, J^T r and the SSE at the current parameters, where
// r = y - f(x) in normalized space. Exposed for the finite-difference and
// mu -> infinity checks.
struct GaussNewtonAccum {
    Eigen::MatrixXd jtj;
    Eigen::VectorXd jtr;
    double sse = 0.0;
};

GaussNewtonAccum accumulate_gauss_newton(const NetModel& net, const Eigen::MatrixXd& x_norm,
                                         const Eigen::MatrixXd& y_norm);

NetModel train_net_lm(const Dataset& data, const NetConfig& config, uint64_t seed);

}  // namespace magshape::learn
