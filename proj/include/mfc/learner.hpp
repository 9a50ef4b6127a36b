#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mfc/env.hpp"
#include "mfc/qnetwork.hpp"
#include "mfc/rng.hpp"

namespace mfc {

/// Row one-hot, column one-hot, then the flattened mean field (row-major).
using Observation = Eigen::VectorXd;

inline int observation_size(const GridSpec& grid) {
    return grid.height() + grid.width() + grid.num_states();
}

Observation encode_observation(Cell s, const MeanField& mf, const GridSpec& grid);
/// Population-independent variant: the mean-field block is all zeros.
Observation encode_observation(Cell s, const GridSpec& grid);

/// softmax(q / tau), computed with max-subtraction.
Eigen::VectorXd policy_from_q(const Eigen::Ref<const Eigen::VectorXd>& q, double tau);

/// tau * ln softmax(q / tau), via q - tau * logsumexp(q / tau). Finite for any finite q.
Eigen::VectorXd scaled_log_policy(const Eigen::Ref<const Eigen::VectorXd>& q, double tau);

struct LearnConstants {
    double gamma = 0.9;
    double tau_q = 0.03;
    /// Lower clip for the Munchausen log-policy bonus; must be negative.
    double clip = -1.0;
    double learning_rate = 0.01;
    int batch_size = 32;
    /// Target network sync period (nu).
    int target_sync_every = 19;
};

struct Transition {
    Observation obs;
    Action action = Action::Stay;
    double reward = 0.0;
    Observation next_obs;
};

/// Munchausen-OMD regression target for one transition:
///   r + clip(tau ln pi'(a|o), cl, 0) + gamma * sum_b pi'(b|o') (Q'(o', b) - tau ln pi'(b|o'))
/// where pi' is the softmax policy of the target network.
double munchausen_target(const Transition& tr, const QNetwork& target, const LearnConstants& c);

/// The same target from precomputed target-network Q-values at o and o'.
double munchausen_target(const Eigen::Ref<const Eigen::VectorXd>& q_obs,
                         const Eigen::Ref<const Eigen::VectorXd>& q_next, int action, double reward,
                         const LearnConstants& c);

class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity = 0) : capacity_(capacity) { items_.reserve(capacity); }

    /// Throws std::length_error when full.
    void push(Transition tr);
    void clear() { items_.clear(); }
    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    bool empty() const { return items_.empty(); }
    const Transition& operator[](std::size_t i) const { return items_[i]; }

    /// `count` indices drawn uniformly with replacement.
    std::vector<std::size_t> sample_indices(std::size_t count, Rng& rng) const;

private:
    std::size_t capacity_;
    std::vector<Transition> items_;
};

/// Adam with bias correction; moments are shaped like the flat parameter vector.
struct AdamState {
    Eigen::VectorXd m;
    Eigen::VectorXd v;
    long step = 0;
    double learning_rate = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    AdamState() = default;
    AdamState(std::size_t param_count, double lr);

    void apply(Eigen::VectorXd& params, const Eigen::VectorXd& grad);
};

struct LossAndGradient {
    double loss = 0.0;
    Eigen::VectorXd grad;
};

/// Mean squared error between Q(o, a) and the (constant) Munchausen targets over the batch,
/// and its exact gradient with respect to `net`.
LossAndGradient batch_loss(const QNetwork& net, const QNetwork& target,
                           std::span<const Transition* const> batch, const LearnConstants& c);

/// One Adam step on the batch loss. Returns the loss before the step.
double train_step(QNetwork& net, const QNetwork& target, AdamState& opt,
                  std::span<const Transition* const> batch, const LearnConstants& c);

/// Deep copy of the online parameters into the target network.
inline void sync_target(const QNetwork& online, QNetwork& target) { target = online; }

/// Whether the target syncs after learning step l (l mod nu == 0).
inline bool target_sync_due(int l, int nu) { return nu > 0 && l % nu == 0; }

/// Per-agent training state that accompanies the agent's acting network.
struct AgentLearner {
    QNetwork target;
    AdamState optimiser;
    ReplayBuffer buffer;

    AgentLearner() = default;
    AgentLearner(const QNetwork& online, std::size_t buffer_capacity, double learning_rate);

    /// `steps` learning iterations on the buffer: sample a batch, take an Adam step,
    /// and sync the target when due. Returns the loss of each step.
    std::vector<double> learn(QNetwork& online, int steps, const LearnConstants& c, Rng& rng);
};

} // namespace mfc
