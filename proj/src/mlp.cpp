#include "crossway/mlp.hpp"

#include <cmath>

#include "crossway/errors.hpp"

namespace crossway {

void MlpSpec::validate() const {
    if (input_dim <= 0 || hidden_layers <= 0 || hidden_units <= 0 ||
        output_dim <= 0) {
        throw ConfigError("MLP dimensions must be positive");
    }
}

Mlp::Mlp(MlpSpec spec) : spec_(spec) {
    spec_.validate();
    int in = spec_.input_dim;
    for (int l = 0; l <= spec_.hidden_layers; ++l) {
        const int out = (l == spec_.hidden_layers) ? spec_.output_dim
                                                   : spec_.hidden_units;
        in_dims_.push_back(in);
        out_dims_.push_back(out);
        w_offsets_.push_back(param_count_);
        param_count_ += out * in;
        b_offsets_.push_back(param_count_);
        param_count_ += out;
        in = out;
    }
}

namespace {

Eigen::MatrixXd orthogonal(int rows, int cols, Rng& rng) {
    const bool transpose = rows < cols;
    const int r = transpose ? cols : rows;
    const int c = transpose ? rows : cols;
    Eigen::MatrixXd a(r, c);
    for (int i = 0; i < r; ++i) {
        for (int j = 0; j < c; ++j) a(i, j) = rng.normal();
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(r, c);
    const Eigen::MatrixXd rmat =
        qr.matrixQR().topLeftCorner(c, c).triangularView<Eigen::Upper>();
    for (int j = 0; j < c; ++j) {
        if (rmat(j, j) < 0.0) q.col(j) = -q.col(j);
    }
    if (transpose) return q.transpose();
    return q;
}

}  // namespace

void Mlp::init_params(std::span<double> params, Rng& rng,
                      double final_layer_gain) const {
    const int n_layers = spec_.hidden_layers + 1;
    for (int l = 0; l < n_layers; ++l) {
        const double gain =
            (l == n_layers - 1) ? final_layer_gain : std::sqrt(2.0);
        const Eigen::MatrixXd q = orthogonal(out_dims_[l], in_dims_[l], rng);
        Eigen::Map<Matrix> w(params.data() + w_offsets_[l], out_dims_[l],
                             in_dims_[l]);
        w = gain * q;
        Eigen::Map<Eigen::VectorXd> b(params.data() + b_offsets_[l],
                                      out_dims_[l]);
        b.setZero();
    }
}

Matrix Mlp::forward(std::span<const double> params, const Matrix& input,
                    Cache* cache) const {
    const int n_layers = spec_.hidden_layers + 1;
    if (cache) {
        cache->activations.clear();
        cache->activations.reserve(n_layers + 1);
        cache->activations.push_back(input);
    }
    Matrix a = input;
    for (int l = 0; l < n_layers; ++l) {
        Eigen::Map<const Matrix> w(params.data() + w_offsets_[l], out_dims_[l],
                                   in_dims_[l]);
        Eigen::Map<const Eigen::RowVectorXd> b(params.data() + b_offsets_[l],
                                               out_dims_[l]);
        Matrix z = a * w.transpose();
        z.rowwise() += b;
        if (l < n_layers - 1) {
            a = z.array().tanh().matrix();
        } else {
            a = std::move(z);
        }
        if (cache) cache->activations.push_back(a);
    }
    return a;
}

void Mlp::backward(std::span<const double> params, const Cache& cache,
                   const Matrix& grad_output, std::span<double> grad) const {
    const int n_layers = spec_.hidden_layers + 1;
    Matrix g = grad_output;
    for (int l = n_layers - 1; l >= 0; --l) {
        const Matrix& a_in = cache.activations[l];
        Eigen::Map<Matrix> dw(grad.data() + w_offsets_[l], out_dims_[l],
                              in_dims_[l]);
        Eigen::Map<Eigen::RowVectorXd> db(grad.data() + b_offsets_[l],
                                          out_dims_[l]);
        dw.noalias() += g.transpose() * a_in;
        db += g.colwise().sum();
        if (l > 0) {
            Eigen::Map<const Matrix> w(params.data() + w_offsets_[l],
                                       out_dims_[l], in_dims_[l]);
            Matrix da = g * w;
            // tanh'(z) from the post-activation value
            g = (da.array() * (1.0 - a_in.array().square())).matrix();
        }
    }
}

void adam_step(std::span<double> params, std::span<const double> grads,
               AdamState& state, double lr, double beta1, double beta2,
               double eps) {
    state.step_count += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step_count));
    for (size_t i = 0; i < params.size(); ++i) {
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grads[i];
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * grads[i] * grads[i];
        const double m_hat = state.m[i] / bc1;
        const double v_hat = state.v[i] / bc2;
        params[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
}

}  // namespace crossway
