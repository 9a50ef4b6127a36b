#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <span>

#include <Eigen/Dense>

#include "mfc/rng.hpp"

namespace mfc {

/// Layer widths of the Q-network: inputs -> hidden1 -> hidden2 -> outputs.
struct NetShape {
    int inputs = 0;
    int hidden1 = 0;
    int hidden2 = 0;
    int outputs = 0;

    std::size_t param_count() const;
    friend bool operator==(const NetShape&, const NetShape&) = default;
};

/// Hidden width for an input layer: the input size rounded down to a power of two.
int default_hidden_width(int inputs);

/// Two rectified hidden layers and a linear readout. All weights and biases live in one flat
/// vector laid out as [W1 | b1 | W2 | b2 | W3 | b3], each matrix column-major and
/// shaped (fan_out x fan_in).
class QNetwork {
public:
    using MatrixMap = Eigen::Map<Eigen::MatrixXd>;
    using ConstMatrixMap = Eigen::Map<const Eigen::MatrixXd>;
    using VectorMap = Eigen::Map<Eigen::VectorXd>;
    using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

    QNetwork() = default;
    /// All-zero parameters.
    explicit QNetwork(const NetShape& shape);
    /// Uniform in +-1/sqrt(fan_in) per layer, weights and biases alike.
    static QNetwork init_uniform(const NetShape& shape, Rng& rng);

    const NetShape& shape() const { return shape_; }
    Eigen::VectorXd& params() { return params_; }
    const Eigen::VectorXd& params() const { return params_; }

    ConstMatrixMap w1() const;
    ConstVectorMap b1() const;
    ConstMatrixMap w2() const;
    ConstVectorMap b2() const;
    ConstMatrixMap w3() const;
    ConstVectorMap b3() const;
    MatrixMap w1();
    VectorMap b1();
    MatrixMap w2();
    VectorMap b2();
    MatrixMap w3();
    VectorMap b3();

    /// Q-values for one observation. Throws std::invalid_argument on a size mismatch.
    Eigen::VectorXd forward(const Eigen::Ref<const Eigen::VectorXd>& obs) const;
    /// Q-values for a batch of observations stored as columns; result is (outputs x batch).
    Eigen::MatrixXd forward_batch(const Eigen::Ref<const Eigen::MatrixXd>& obs) const;

    /// Gradient of sum_b dq(:, b) . Q(obs(:, b)) with respect to the parameters, where dq is
    /// the upstream derivative of the loss with respect to the outputs.
    Eigen::VectorXd backward(const Eigen::Ref<const Eigen::MatrixXd>& obs,
                             const Eigen::Ref<const Eigen::MatrixXd>& dq) const;

    friend bool operator==(const QNetwork& a, const QNetwork& b) {
        return a.shape_ == b.shape_ && a.params_ == b.params_;
    }

private:
    struct Offsets {
        std::size_t w1, b1, w2, b2, w3, b3;
    };
    Offsets offsets() const;
    void check_inputs(Eigen::Index rows) const;

    NetShape shape_{};
    Eigen::VectorXd params_;
};

/// Text checkpoint: a shape header then each tensor at 17 significant digits.
void write_checkpoint(std::ostream& out, const QNetwork& net);
/// Throws std::runtime_error on a malformed checkpoint.
QNetwork read_checkpoint(std::istream& in);

} // namespace mfc
