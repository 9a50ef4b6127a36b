#include "mfc/learner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mfc {

namespace {

Observation one_hots(Cell s, const GridSpec& grid) {
    Observation obs = Observation::Zero(observation_size(grid));
    obs(s.row) = 1.0;
    obs(grid.height() + s.col) = 1.0;
    return obs;
}

double logsumexp_scaled(const Eigen::Ref<const Eigen::VectorXd>& q, double tau) {
    const double top = q.maxCoeff() / tau;
    return top + std::log(((q.array() / tau) - top).exp().sum());
}

} // namespace

Observation encode_observation(Cell s, const MeanField& mf, const GridSpec& grid) {
    if (mf.size() != static_cast<std::size_t>(grid.num_states())) {
        throw std::invalid_argument("mean field size does not match the grid");
    }
    Observation obs = one_hots(s, grid);
    const int offset = grid.height() + grid.width();
    for (int i = 0; i < grid.num_states(); ++i) {
        obs(offset + i) = mf[static_cast<std::size_t>(i)];
    }
    return obs;
}

Observation encode_observation(Cell s, const GridSpec& grid) {
    return one_hots(s, grid);
}

Eigen::VectorXd policy_from_q(const Eigen::Ref<const Eigen::VectorXd>& q, double tau) {
    if (!(tau > 0.0)) {
        throw std::invalid_argument("softmax temperature must be positive");
    }
    Eigen::VectorXd p = ((q.array() - q.maxCoeff()) / tau).exp().matrix();
    return p / p.sum();
}

Eigen::VectorXd scaled_log_policy(const Eigen::Ref<const Eigen::VectorXd>& q, double tau) {
    return (q.array() - tau * logsumexp_scaled(q, tau)).matrix();
}

double munchausen_target(const Eigen::Ref<const Eigen::VectorXd>& q_obs,
                         const Eigen::Ref<const Eigen::VectorXd>& q_next, int action, double reward,
                         const LearnConstants& c) {
    const double bonus = std::clamp(scaled_log_policy(q_obs, c.tau_q)(action), c.clip, 0.0);
    const Eigen::VectorXd pi_next = policy_from_q(q_next, c.tau_q);
    const Eigen::VectorXd soft_next = q_next - scaled_log_policy(q_next, c.tau_q);
    return reward + bonus + c.gamma * pi_next.dot(soft_next);
}

double munchausen_target(const Transition& tr, const QNetwork& target, const LearnConstants& c) {
    return munchausen_target(target.forward(tr.obs), target.forward(tr.next_obs),
                             action_index(tr.action), tr.reward, c);
}

void ReplayBuffer::push(Transition tr) {
    if (items_.size() >= capacity_) {
        throw std::length_error("replay buffer is full");
    }
    items_.push_back(std::move(tr));
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t count, Rng& rng) const {
    if (items_.empty()) {
        throw std::logic_error("cannot sample from an empty replay buffer");
    }
    std::vector<std::size_t> idx(count);
    for (auto& i : idx) {
        i = static_cast<std::size_t>(uniform_index(rng, items_.size()));
    }
    return idx;
}

AdamState::AdamState(std::size_t param_count, double lr)
    : m(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(param_count))),
      v(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(param_count))), learning_rate(lr) {}

void AdamState::apply(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
    ++step;
    m = beta1 * m + (1.0 - beta1) * grad;
    v = beta2 * v + (1.0 - beta2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    params.array() -= learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + epsilon);
}

LossAndGradient batch_loss(const QNetwork& net, const QNetwork& target,
                           std::span<const Transition* const> batch, const LearnConstants& c) {
    if (batch.empty()) {
        throw std::invalid_argument("training batch is empty");
    }
    const auto b = static_cast<Eigen::Index>(batch.size());
    const int in = net.shape().inputs;
    Eigen::MatrixXd obs(in, b);
    Eigen::MatrixXd next(in, b);
    for (Eigen::Index k = 0; k < b; ++k) {
        obs.col(k) = batch[static_cast<std::size_t>(k)]->obs;
        next.col(k) = batch[static_cast<std::size_t>(k)]->next_obs;
    }
    // Targets come from the frozen network and carry no gradient.
    const Eigen::MatrixXd tq_obs = target.forward_batch(obs);
    const Eigen::MatrixXd tq_next = target.forward_batch(next);
    const Eigen::MatrixXd q = net.forward_batch(obs);

    Eigen::MatrixXd dq = Eigen::MatrixXd::Zero(q.rows(), b);
    double loss = 0.0;
    const double scale = 1.0 / static_cast<double>(b);
    for (Eigen::Index k = 0; k < b; ++k) {
        const Transition& tr = *batch[static_cast<std::size_t>(k)];
        const int a = action_index(tr.action);
        const double t = munchausen_target(tq_obs.col(k), tq_next.col(k), a, tr.reward, c);
        const double err = q(a, k) - t;
        loss += err * err;
        dq(a, k) = 2.0 * err * scale;
    }
    return {loss * scale, net.backward(obs, dq)};
}

double train_step(QNetwork& net, const QNetwork& target, AdamState& opt,
                  std::span<const Transition* const> batch, const LearnConstants& c) {
    LossAndGradient lg = batch_loss(net, target, batch, c);
    opt.apply(net.params(), lg.grad);
    return lg.loss;
}

AgentLearner::AgentLearner(const QNetwork& online, std::size_t buffer_capacity, double learning_rate)
    : target(online), optimiser(online.shape().param_count(), learning_rate), buffer(buffer_capacity) {}

std::vector<double> AgentLearner::learn(QNetwork& online, int steps, const LearnConstants& c, Rng& rng) {
    std::vector<double> losses;
    losses.reserve(static_cast<std::size_t>(std::max(steps, 0)));
    std::vector<const Transition*> batch(static_cast<std::size_t>(c.batch_size));
    for (int l = 0; l < steps; ++l) {
        const auto idx = buffer.sample_indices(batch.size(), rng);
        for (std::size_t k = 0; k < idx.size(); ++k) {
            batch[k] = &buffer[idx[k]];
        }
        losses.push_back(train_step(online, target, optimiser, batch, c));
        if (target_sync_due(l, c.target_sync_every)) {
            sync_target(online, target);
        }
    }
    return losses;
}

} // namespace mfc
