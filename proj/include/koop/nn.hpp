#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "koop/rng.hpp"

namespace koop {

enum class Activation { kReLU, kIdentity };

struct DenseLayer {
    Eigen::MatrixXd weights;  // out x in
    Eigen::VectorXd bias;     // size 0 for a bias-free layer
    Activation activation = Activation::kIdentity;

    bool has_bias() const { return bias.size() > 0; }
    Eigen::Index in_dim() const { return weights.cols(); }
    Eigen::Index out_dim() const { return weights.rows(); }
};

struct Mlp {
    std::vector<DenseLayer> layers;

    Eigen::Index input_dim() const { return layers.front().in_dim(); }
    Eigen::Index output_dim() const { return layers.back().out_dim(); }
};

// Hidden layers use `hidden`, the final layer is linear. Glorot-uniform
// weights, zero biases.
Mlp make_mlp(const std::vector<int>& widths, Activation hidden, bool with_bias, Rng& rng);

// Single bias-free linear layer (the A/B net shape).
Mlp make_linear_map(int out_dim, int in_dim);

// Throws ShapeError naming the first layer whose dims do not chain.
void validate_mlp(const Mlp& net);

// Forward-pass intermediates for one batch (columns are samples).
struct MlpCache {
    Eigen::MatrixXd input;
    std::vector<Eigen::MatrixXd> preacts;
    std::vector<Eigen::MatrixXd> acts;
    bool valid = false;
};

// Batched forward; columns are independent samples.
Eigen::MatrixXd mlp_forward_batch(const Mlp& net, const Eigen::MatrixXd& x, MlpCache* cache = nullptr);

Eigen::VectorXd mlp_forward(const Mlp& net, const Eigen::VectorXd& x);

struct MlpGrads {
    std::vector<Eigen::MatrixXd> d_weights;
    std::vector<Eigen::VectorXd> d_bias;  // size 0 where the layer has none
    Eigen::MatrixXd d_input;

    MlpGrads& operator+=(const MlpGrads& other);
};

MlpGrads zero_grads(const Mlp& net);

// Exact reverse-mode gradients for the batch captured in `cache`.
// `upstream` is dLoss/dOutput (out x batch). ReLU subgradient at 0 is 0.
MlpGrads mlp_backward(const Mlp& net, const MlpCache& cache, const Eigen::MatrixXd& upstream);

// Same, accumulating into `into` (cheaper than += on temporaries).
void mlp_backward_accumulate(const Mlp& net, const MlpCache& cache, const Eigen::MatrixXd& upstream,
                             MlpGrads& into);

// Flat named view over a parameter block; Adam and the finite-difference
// checker address every trainable scalar through these.
struct ParamView {
    std::string name;
    double* data = nullptr;
    Eigen::Index size = 0;
};

std::vector<ParamView> mlp_param_views(Mlp& net, const std::string& prefix);

// Flattens per-layer gradients in the same order as mlp_param_views.
void append_flat_grads(const Mlp& net, const MlpGrads& grads, std::vector<Eigen::VectorXd>& out);

struct AdamState {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    long step_count = 0;
    std::vector<Eigen::VectorXd> first_moment;
    std::vector<Eigen::VectorXd> second_moment;

    static AdamState init(const std::vector<ParamView>& params, double learning_rate);
};

// Standard Adam with bias correction. Throws NumericError naming the
// parameter on any non-finite gradient component.
void adam_step(const std::vector<ParamView>& params, const std::vector<Eigen::VectorXd>& grads,
               AdamState& state);

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::string worst_param;
    bool pass = false;
};

// Central finite differences over every scalar in `params`, compared
// against `analytic`. `loss` is re-evaluated with parameters perturbed in
// place (and restored bit-exactly).
GradCheckReport finite_diff_check(const std::vector<ParamView>& params,
                                  const std::vector<Eigen::VectorXd>& analytic,
                                  const std::function<double()>& loss, double step = 1e-5,
                                  double tolerance = 1e-4);

}  // namespace koop
