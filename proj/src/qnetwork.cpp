#include "mfc/qnetwork.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mfc/numfmt.hpp"

namespace mfc {

std::size_t NetShape::param_count() const {
    const auto in = static_cast<std::size_t>(inputs);
    const auto h1 = static_cast<std::size_t>(hidden1);
    const auto h2 = static_cast<std::size_t>(hidden2);
    const auto out = static_cast<std::size_t>(outputs);
    return h1 * in + h1 + h2 * h1 + h2 + out * h2 + out;
}

int default_hidden_width(int inputs) {
    if (inputs < 1) {
        throw std::invalid_argument("network needs at least one input");
    }
    return static_cast<int>(std::bit_floor(static_cast<unsigned>(inputs)));
}

QNetwork::QNetwork(const NetShape& shape) : shape_(shape) {
    if (shape.inputs < 1 || shape.hidden1 < 1 || shape.hidden2 < 1 || shape.outputs < 1) {
        throw std::invalid_argument("every network layer needs at least one unit");
    }
    params_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(shape.param_count()));
}

QNetwork QNetwork::init_uniform(const NetShape& shape, Rng& rng) {
    QNetwork net(shape);
    auto fill = [&](double* data, std::size_t count, int fan_in) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (std::size_t i = 0; i < count; ++i) {
            data[i] = (2.0 * uniform01(rng) - 1.0) * bound;
        }
    };
    const Offsets o = net.offsets();
    double* p = net.params_.data();
    fill(p + o.w1, o.b1 - o.w1, shape.inputs);
    fill(p + o.b1, o.w2 - o.b1, shape.inputs);
    fill(p + o.w2, o.b2 - o.w2, shape.hidden1);
    fill(p + o.b2, o.w3 - o.b2, shape.hidden1);
    fill(p + o.w3, o.b3 - o.w3, shape.hidden2);
    fill(p + o.b3, net.shape_.param_count() - o.b3, shape.hidden2);
    return net;
}

QNetwork::Offsets QNetwork::offsets() const {
    const auto in = static_cast<std::size_t>(shape_.inputs);
    const auto h1 = static_cast<std::size_t>(shape_.hidden1);
    const auto h2 = static_cast<std::size_t>(shape_.hidden2);
    const auto out = static_cast<std::size_t>(shape_.outputs);
    Offsets o{};
    o.w1 = 0;
    o.b1 = o.w1 + h1 * in;
    o.w2 = o.b1 + h1;
    o.b2 = o.w2 + h2 * h1;
    o.w3 = o.b2 + h2;
    o.b3 = o.w3 + out * h2;
    return o;
}

QNetwork::ConstMatrixMap QNetwork::w1() const {
    return {params_.data() + offsets().w1, shape_.hidden1, shape_.inputs};
}
QNetwork::ConstVectorMap QNetwork::b1() const { return {params_.data() + offsets().b1, shape_.hidden1}; }
QNetwork::ConstMatrixMap QNetwork::w2() const {
    return {params_.data() + offsets().w2, shape_.hidden2, shape_.hidden1};
}
QNetwork::ConstVectorMap QNetwork::b2() const { return {params_.data() + offsets().b2, shape_.hidden2}; }
QNetwork::ConstMatrixMap QNetwork::w3() const {
    return {params_.data() + offsets().w3, shape_.outputs, shape_.hidden2};
}
QNetwork::ConstVectorMap QNetwork::b3() const { return {params_.data() + offsets().b3, shape_.outputs}; }

QNetwork::MatrixMap QNetwork::w1() { return {params_.data() + offsets().w1, shape_.hidden1, shape_.inputs}; }
QNetwork::VectorMap QNetwork::b1() { return {params_.data() + offsets().b1, shape_.hidden1}; }
QNetwork::MatrixMap QNetwork::w2() { return {params_.data() + offsets().w2, shape_.hidden2, shape_.hidden1}; }
QNetwork::VectorMap QNetwork::b2() { return {params_.data() + offsets().b2, shape_.hidden2}; }
QNetwork::MatrixMap QNetwork::w3() { return {params_.data() + offsets().w3, shape_.outputs, shape_.hidden2}; }
QNetwork::VectorMap QNetwork::b3() { return {params_.data() + offsets().b3, shape_.outputs}; }

void QNetwork::check_inputs(Eigen::Index rows) const {
    if (rows != shape_.inputs) {
        throw std::invalid_argument("observation has " + std::to_string(rows) +
                                    " entries but the network expects " +
                                    std::to_string(shape_.inputs));
    }
}

Eigen::VectorXd QNetwork::forward(const Eigen::Ref<const Eigen::VectorXd>& obs) const {
    check_inputs(obs.size());
    const Eigen::VectorXd h1 = (w1() * obs + b1()).cwiseMax(0.0);
    const Eigen::VectorXd h2 = (w2() * h1 + b2()).cwiseMax(0.0);
    return w3() * h2 + b3();
}

Eigen::MatrixXd QNetwork::forward_batch(const Eigen::Ref<const Eigen::MatrixXd>& obs) const {
    check_inputs(obs.rows());
    const Eigen::MatrixXd h1 = ((w1() * obs).colwise() + b1()).cwiseMax(0.0);
    const Eigen::MatrixXd h2 = ((w2() * h1).colwise() + b2()).cwiseMax(0.0);
    return (w3() * h2).colwise() + b3();
}

Eigen::VectorXd QNetwork::backward(const Eigen::Ref<const Eigen::MatrixXd>& obs,
                                   const Eigen::Ref<const Eigen::MatrixXd>& dq) const {
    check_inputs(obs.rows());
    if (dq.rows() != shape_.outputs || dq.cols() != obs.cols()) {
        throw std::invalid_argument("output gradient shape does not match the batch");
    }
    const Eigen::MatrixXd z1 = (w1() * obs).colwise() + b1();
    const Eigen::MatrixXd h1 = z1.cwiseMax(0.0);
    const Eigen::MatrixXd z2 = (w2() * h1).colwise() + b2();
    const Eigen::MatrixXd h2 = z2.cwiseMax(0.0);

    Eigen::VectorXd grad(params_.size());
    const Offsets o = offsets();
    auto gw = [&](std::size_t off, int rows, int cols) {
        return Eigen::Map<Eigen::MatrixXd>(grad.data() + off, rows, cols);
    };
    auto gb = [&](std::size_t off, int rows) { return Eigen::Map<Eigen::VectorXd>(grad.data() + off, rows); };

    gw(o.w3, shape_.outputs, shape_.hidden2).noalias() = dq * h2.transpose();
    gb(o.b3, shape_.outputs) = dq.rowwise().sum();

    const Eigen::MatrixXd dz2 = (w3().transpose() * dq).cwiseProduct((z2.array() > 0.0).cast<double>().matrix());
    gw(o.w2, shape_.hidden2, shape_.hidden1).noalias() = dz2 * h1.transpose();
    gb(o.b2, shape_.hidden2) = dz2.rowwise().sum();

    const Eigen::MatrixXd dz1 = (w2().transpose() * dz2).cwiseProduct((z1.array() > 0.0).cast<double>().matrix());
    gw(o.w1, shape_.hidden1, shape_.inputs).noalias() = dz1 * obs.transpose();
    gb(o.b1, shape_.hidden1) = dz1.rowwise().sum();
    return grad;
}

namespace {

void write_tensor(std::ostream& out, const char* name, const Eigen::Ref<const Eigen::MatrixXd>& m) {
    out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            out << (c == 0 ? "" : " ") << format_real(m(r, c));
        }
        out << '\n';
    }
}

void read_tensor(std::istream& in, const char* name, Eigen::Ref<Eigen::MatrixXd> m) {
    std::string tag;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    if (!(in >> tag >> rows >> cols) || tag != name || rows != m.rows() || cols != m.cols()) {
        throw std::runtime_error(std::string("checkpoint: bad header for tensor ") + name);
    }
    std::string token;
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            if (!(in >> token)) {
                throw std::runtime_error(std::string("checkpoint: truncated tensor ") + name);
            }
            const auto v = parse_real(token);
            if (!v) {
                throw std::runtime_error("checkpoint: bad number '" + token + "'");
            }
            m(r, c) = *v;
        }
    }
}

} // namespace

void write_checkpoint(std::ostream& out, const QNetwork& net) {
    const NetShape& s = net.shape();
    out << "qnetwork 1\n";
    out << "shape " << s.inputs << ' ' << s.hidden1 << ' ' << s.hidden2 << ' ' << s.outputs << '\n';
    write_tensor(out, "w1", net.w1());
    write_tensor(out, "b1", net.b1());
    write_tensor(out, "w2", net.w2());
    write_tensor(out, "b2", net.b2());
    write_tensor(out, "w3", net.w3());
    write_tensor(out, "b3", net.b3());
}

QNetwork read_checkpoint(std::istream& in) {
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != "qnetwork" || version != 1) {
        throw std::runtime_error("checkpoint: not a version-1 qnetwork file");
    }
    std::string tag;
    NetShape s;
    if (!(in >> tag >> s.inputs >> s.hidden1 >> s.hidden2 >> s.outputs) || tag != "shape") {
        throw std::runtime_error("checkpoint: missing shape header");
    }
    QNetwork net(s);
    read_tensor(in, "w1", net.w1());
    read_tensor(in, "b1", net.b1());
    read_tensor(in, "w2", net.w2());
    read_tensor(in, "b2", net.b2());
    read_tensor(in, "w3", net.w3());
    read_tensor(in, "b3", net.b3());
    return net;
}

} // namespace mfc
