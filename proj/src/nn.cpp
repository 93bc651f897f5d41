#include "koop/nn.hpp"

#include <cmath>

#include "koop/errors.hpp"

namespace koop {

Mlp make_mlp(const std::vector<int>& widths, Activation hidden, bool with_bias, Rng& rng) {
    if (widths.size() < 2) throw ArgumentError("make_mlp: need at least input and output widths");
    Mlp net;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        const int in = widths[l];
        const int out = widths[l + 1];
        if (in <= 0 || out <= 0) throw ArgumentError("make_mlp: widths must be positive");
        DenseLayer layer;
        layer.weights.resize(out, in);
        const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
        for (Eigen::Index j = 0; j < layer.weights.cols(); ++j)
            for (Eigen::Index i = 0; i < layer.weights.rows(); ++i)
                layer.weights(i, j) = rng.uniform(-bound, bound);
        if (with_bias) layer.bias = Eigen::VectorXd::Zero(out);
        const bool last = (l + 2 == widths.size());
        layer.activation = last ? Activation::kIdentity : hidden;
        net.layers.push_back(std::move(layer));
    }
    return net;
}

Mlp make_linear_map(int out_dim, int in_dim) {
    if (out_dim <= 0 || in_dim <= 0) throw ArgumentError("make_linear_map: dims must be positive");
    Mlp net;
    DenseLayer layer;
    layer.weights = Eigen::MatrixXd::Zero(out_dim, in_dim);
    layer.activation = Activation::kIdentity;
    net.layers.push_back(std::move(layer));
    return net;
}

void validate_mlp(const Mlp& net) {
    if (net.layers.empty()) throw ShapeError("mlp has no layers");
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const DenseLayer& layer = net.layers[l];
        if (layer.has_bias() && layer.bias.size() != layer.out_dim())
            throw ShapeError("layer " + std::to_string(l) + ": bias size " +
                             std::to_string(layer.bias.size()) + " != out dim " +
                             std::to_string(layer.out_dim()));
        if (l > 0 && net.layers[l - 1].out_dim() != layer.in_dim())
            throw ShapeError("layer " + std::to_string(l) + ": in dim " +
                             std::to_string(layer.in_dim()) + " does not chain from previous out dim " +
                             std::to_string(net.layers[l - 1].out_dim()));
    }
}

namespace {

void apply_activation(Activation act, Eigen::MatrixXd& m) {
    if (act == Activation::kReLU) m = m.cwiseMax(0.0);
}

}  // namespace

Eigen::MatrixXd mlp_forward_batch(const Mlp& net, const Eigen::MatrixXd& x, MlpCache* cache) {
    if (net.layers.empty()) throw ShapeError("mlp has no layers");
    if (x.rows() != net.input_dim())
        throw ShapeError("mlp_forward: input dim " + std::to_string(x.rows()) + " != layer 0 in dim " +
                         std::to_string(net.input_dim()));
    if (cache) {
        cache->input = x;
        cache->preacts.assign(net.layers.size(), {});
        cache->acts.assign(net.layers.size(), {});
    }
    Eigen::MatrixXd a = x;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const DenseLayer& layer = net.layers[l];
        if (a.rows() != layer.in_dim())
            throw ShapeError("mlp_forward: layer " + std::to_string(l) + " expects dim " +
                             std::to_string(layer.in_dim()) + ", got " + std::to_string(a.rows()));
        Eigen::MatrixXd pre = layer.weights * a;
        if (layer.has_bias()) pre.colwise() += layer.bias;
        if (cache) cache->preacts[l] = pre;
        apply_activation(layer.activation, pre);
        if (cache) cache->acts[l] = pre;
        a = std::move(pre);
    }
    if (cache) cache->valid = true;
    return a;
}

Eigen::VectorXd mlp_forward(const Mlp& net, const Eigen::VectorXd& x) {
    return mlp_forward_batch(net, x, nullptr);
}

MlpGrads& MlpGrads::operator+=(const MlpGrads& other) {
    for (std::size_t l = 0; l < d_weights.size(); ++l) {
        d_weights[l] += other.d_weights[l];
        if (d_bias[l].size() > 0) d_bias[l] += other.d_bias[l];
    }
    d_input += other.d_input;
    return *this;
}

MlpGrads zero_grads(const Mlp& net) {
    MlpGrads g;
    g.d_weights.reserve(net.layers.size());
    g.d_bias.reserve(net.layers.size());
    for (const DenseLayer& layer : net.layers) {
        g.d_weights.push_back(Eigen::MatrixXd::Zero(layer.out_dim(), layer.in_dim()));
        g.d_bias.push_back(layer.has_bias() ? Eigen::VectorXd::Zero(layer.out_dim())
                                            : Eigen::VectorXd());
    }
    g.d_input.resize(0, 0);
    return g;
}

void mlp_backward_accumulate(const Mlp& net, const MlpCache& cache, const Eigen::MatrixXd& upstream,
                             MlpGrads& into) {
    if (!cache.valid) throw StateError("mlp_backward: no forward cache for this input");
    if (upstream.rows() != net.output_dim() || upstream.cols() != cache.input.cols())
        throw ShapeError("mlp_backward: upstream gradient is " + std::to_string(upstream.rows()) +
                         "x" + std::to_string(upstream.cols()) + ", expected " +
                         std::to_string(net.output_dim()) + "x" + std::to_string(cache.input.cols()));
    Eigen::MatrixXd delta = upstream;
    for (std::size_t l = net.layers.size(); l-- > 0;) {
        const DenseLayer& layer = net.layers[l];
        if (layer.activation == Activation::kReLU) {
            // Subgradient at exactly 0 is 0.
            delta = (cache.preacts[l].array() > 0.0).select(delta, 0.0);
        }
        const Eigen::MatrixXd& below = (l == 0) ? cache.input : cache.acts[l - 1];
        into.d_weights[l].noalias() += delta * below.transpose();
        if (layer.has_bias()) into.d_bias[l] += delta.rowwise().sum();
        if (l > 0)
            delta = (layer.weights.transpose() * delta).eval();
        else {
            if (into.d_input.size() == 0)
                into.d_input = layer.weights.transpose() * delta;
            else
                into.d_input.noalias() += layer.weights.transpose() * delta;
        }
    }
}

MlpGrads mlp_backward(const Mlp& net, const MlpCache& cache, const Eigen::MatrixXd& upstream) {
    MlpGrads g = zero_grads(net);
    mlp_backward_accumulate(net, cache, upstream, g);
    return g;
}

std::vector<ParamView> mlp_param_views(Mlp& net, const std::string& prefix) {
    std::vector<ParamView> views;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        DenseLayer& layer = net.layers[l];
        views.push_back({prefix + ".L" + std::to_string(l) + ".W", layer.weights.data(),
                         layer.weights.size()});
        if (layer.has_bias())
            views.push_back(
                {prefix + ".L" + std::to_string(l) + ".b", layer.bias.data(), layer.bias.size()});
    }
    return views;
}

void append_flat_grads(const Mlp& net, const MlpGrads& grads, std::vector<Eigen::VectorXd>& out) {
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        out.push_back(Eigen::Map<const Eigen::VectorXd>(grads.d_weights[l].data(),
                                                        grads.d_weights[l].size()));
        if (net.layers[l].has_bias()) out.push_back(grads.d_bias[l]);
    }
}

AdamState AdamState::init(const std::vector<ParamView>& params, double learning_rate) {
    AdamState st;
    st.learning_rate = learning_rate;
    st.first_moment.reserve(params.size());
    st.second_moment.reserve(params.size());
    for (const ParamView& p : params) {
        st.first_moment.push_back(Eigen::VectorXd::Zero(p.size));
        st.second_moment.push_back(Eigen::VectorXd::Zero(p.size));
    }
    return st;
}

void adam_step(const std::vector<ParamView>& params, const std::vector<Eigen::VectorXd>& grads,
               AdamState& state) {
    if (params.size() != grads.size() || params.size() != state.first_moment.size())
        throw ShapeError("adam_step: parameter/gradient/state counts differ");
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (grads[i].size() != params[i].size)
            throw ShapeError("adam_step: gradient size mismatch for " + params[i].name);
        if (!grads[i].allFinite())
            throw NumericError("adam_step: non-finite gradient in " + params[i].name);
    }
    state.step_count += 1;
    const double t = static_cast<double>(state.step_count);
    const double bc1 = 1.0 - std::pow(state.beta1, t);
    const double bc2 = 1.0 - std::pow(state.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        Eigen::VectorXd& m = state.first_moment[i];
        Eigen::VectorXd& v = state.second_moment[i];
        const Eigen::VectorXd& g = grads[i];
        m = state.beta1 * m + (1.0 - state.beta1) * g;
        v = state.beta2 * v.array().matrix() + (1.0 - state.beta2) * g.array().square().matrix();
        Eigen::Map<Eigen::VectorXd> p(params[i].data, params[i].size);
        p.array() -= state.learning_rate * (m.array() / bc1) /
                     ((v.array() / bc2).sqrt() + state.epsilon);
    }
}

GradCheckReport finite_diff_check(const std::vector<ParamView>& params,
                                  const std::vector<Eigen::VectorXd>& analytic,
                                  const std::function<double()>& loss, double step,
                                  double tolerance) {
    if (params.size() != analytic.size())
        throw ShapeError("finite_diff_check: parameter/gradient counts differ");
    GradCheckReport report;
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (analytic[i].size() != params[i].size)
            throw ShapeError("finite_diff_check: gradient size mismatch for " + params[i].name);
        for (Eigen::Index k = 0; k < params[i].size; ++k) {
            double* slot = params[i].data + k;
            const double saved = *slot;
            *slot = saved + step;
            const double up = loss();
            *slot = saved - step;
            const double down = loss();
            *slot = saved;
            const double fd = (up - down) / (2.0 * step);
            const double an = analytic[i][k];
            const double rel =
                std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-6});
            if (rel > report.max_rel_error) {
                report.max_rel_error = rel;
                report.worst_param = params[i].name + "[" + std::to_string(k) + "]";
            }
        }
    }
    report.pass = report.max_rel_error < tolerance;
    return report;
}

}  // namespace koop
