#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "crossway/rng.hpp"

namespace crossway {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct MlpSpec {
    int input_dim = 129;
    int hidden_layers = 8;
    int hidden_units = 64;
    int output_dim = 1;

    void validate() const;
    bool operator==(const MlpSpec&) const = default;
};

// Fully connected tanh network over a caller-owned flat parameter vector.
// Layout: per layer, row-major weight matrix (out x in) followed by the
// bias vector.
class Mlp {
  public:
    explicit Mlp(MlpSpec spec);

    const MlpSpec& spec() const { return spec_; }
    int param_count() const { return param_count_; }

    // Orthogonal weight init (biases zero); the final layer uses its own
    // gain (small for policy heads, 1 for value heads).
    void init_params(std::span<double> params, Rng& rng,
                     double final_layer_gain) const;

    struct Cache {
        std::vector<Matrix> activations;  // [0] = input, [L] = output
    };

    // input: n x input_dim, returns n x output_dim.
    Matrix forward(std::span<const double> params, const Matrix& input,
                   Cache* cache = nullptr) const;

    // Accumulates dLoss/dparams into grad given dLoss/doutput.
    void backward(std::span<const double> params, const Cache& cache,
                  const Matrix& grad_output, std::span<double> grad) const;

  private:
    MlpSpec spec_;
    std::vector<int> in_dims_, out_dims_, w_offsets_, b_offsets_;
    int param_count_ = 0;
};

// Standard bias-corrected Adam over a flat parameter vector.
struct AdamState {
    std::vector<double> m, v;
    long long step_count = 0;

    explicit AdamState(size_t n) : m(n, 0.0), v(n, 0.0) {}
};

void adam_step(std::span<double> params, std::span<const double> grads,
               AdamState& state, double lr, double beta1 = 0.9,
               double beta2 = 0.999, double eps = 1e-8);

}  // namespace crossway
