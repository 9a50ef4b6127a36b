#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "mfc/learner.hpp"
#include "oracles.hpp"

using namespace mfc;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> xs) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) {
        v(i++) = x;
    }
    return v;
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
    return {v.data(), v.data() + v.size()};
}

Transition random_transition(int inputs, std::mt19937_64& gen) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Transition tr;
    tr.obs = Eigen::VectorXd::NullaryExpr(inputs, [&] { return u(gen); });
    tr.next_obs = Eigen::VectorXd::NullaryExpr(inputs, [&] { return u(gen); });
    tr.action = action_from_index(static_cast<int>(gen() % kNumActions));
    tr.reward = u(gen);
    return tr;
}

} // namespace

TEST_CASE("observation encoding") {
    const GridSpec g(2, 2);
    const MeanField uniform{{0.25, 0.25, 0.25, 0.25}};
    CHECK(to_std(encode_observation({0, 0}, uniform, g)) ==
          std::vector<double>{1, 0, 1, 0, 0.25, 0.25, 0.25, 0.25});
    CHECK(to_std(encode_observation({1, 1}, MeanField{{0, 0, 0, 1}}, g)) ==
          std::vector<double>{0, 1, 0, 1, 0, 0, 0, 1});
    CHECK(to_std(encode_observation({1, 0}, g)) == std::vector<double>{0, 1, 1, 0, 0, 0, 0, 0});
    CHECK(observation_size(GridSpec(20, 20)) == 440);
}

TEST_CASE("hidden width rule") {
    CHECK(default_hidden_width(440) == 256);
    CHECK(default_hidden_width(120) == 64);
    CHECK(default_hidden_width(256) == 256);
    CHECK(NetShape{3, 2, 2, 5}.param_count() == 3 * 2 + 2 + 2 * 2 + 2 + 2 * 5 + 5);
}

TEST_CASE("forward pass") {
    CHECK(QNetwork(NetShape{4, 3, 3, 5}).forward(Eigen::VectorXd::Ones(4)).isZero());

    QNetwork toy(NetShape{1, 1, 1, 1});
    toy.w1()(0, 0) = 2.0;
    toy.b1()(0) = -1.0;
    toy.w2()(0, 0) = 3.0;
    toy.b2()(0) = 0.5;
    toy.w3()(0, 0) = -1.5;
    toy.b3()(0) = 0.25;
    // relu(2*4 - 1) = 7, relu(3*7 + 0.5) = 21.5, -1.5*21.5 + 0.25 = -32
    CHECK(toy.forward(vec({4.0}))(0) == -32.0);
    CHECK(toy.forward(vec({0.0}))(0) == doctest::Approx(-1.5 * 0.5 + 0.25));
    CHECK_THROWS_AS(toy.forward(vec({1.0, 2.0})), std::invalid_argument);

    std::mt19937_64 gen(1);
    Rng rng = make_stream(5, StreamPurpose::AgentInit);
    const QNetwork net = QNetwork::init_uniform({6, 8, 7, 5}, rng);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> x(6);
        for (double& v : x) {
            v = std::uniform_real_distribution<double>(-2, 2)(gen);
        }
        const Eigen::VectorXd q = net.forward(Eigen::Map<Eigen::VectorXd>(x.data(), 6));
        const auto want = oracle::forward(net, x);
        for (int a = 0; a < 5; ++a) {
            CHECK(q(a) == doctest::Approx(want[a]).epsilon(1e-13));
            CHECK(std::isfinite(q(a)));
        }
    }
}

TEST_CASE("initialisation bounds and determinism") {
    Rng a = make_stream(9, StreamPurpose::AgentInit, 3);
    Rng b = make_stream(9, StreamPurpose::AgentInit, 3);
    const QNetwork x = QNetwork::init_uniform({16, 8, 8, 5}, a);
    const QNetwork y = QNetwork::init_uniform({16, 8, 8, 5}, b);
    CHECK(x == y);
    CHECK(x.w1().cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(16.0));
    CHECK(x.w3().cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(8.0));
}

TEST_CASE("softmax policy") {
    CHECK(policy_from_q(Eigen::VectorXd::Constant(5, 3.0), 0.03).isApproxToConstant(0.2));
    const Eigen::VectorXd p = policy_from_q(vec({0.0, 0.03 * std::log(2.0)}), 0.03);
    CHECK(p(0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(p(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(policy_from_q(vec({0.0, 1.0, 0.5}), 1e-6)(1) == 1.0);
    CHECK_THROWS(policy_from_q(vec({0.0}), 0.0));

    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> u(-1000.0, 1000.0);
    for (int trial = 0; trial < 200; ++trial) {
        const Eigen::VectorXd q = Eigen::VectorXd::NullaryExpr(5, [&] { return u(gen); });
        const Eigen::VectorXd pi = policy_from_q(q, 0.03);
        CHECK(pi.sum() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK((pi.array() >= 0.0).all());
        CHECK(scaled_log_policy(q, 0.03).allFinite());
    }
}

TEST_CASE("munchausen target hand case") {
    const LearnConstants c;
    const double cq = 0.7;
    const Eigen::VectorXd q = Eigen::VectorXd::Constant(5, cq);
    const double t = munchausen_target(q, q, 2, 0.5, c);
    const double penalty = 0.03 * -std::log(5.0);
    CHECK(penalty == doctest::Approx(-0.0483).epsilon(1e-3));
    CHECK(t == doctest::Approx(0.5 + penalty + 0.9 * (cq - penalty)).epsilon(1e-14));
    CHECK(t == doctest::Approx(0.5 - 0.0483 + 0.9 * cq + 0.0434).epsilon(1e-3));

    SUBCASE("clip floor") {
        const Eigen::VectorXd sharp = vec({0.0, 10.0, 0.0, 0.0, 0.0});
        const double floor = munchausen_target(sharp, Eigen::VectorXd::Zero(5), 0, 0.0, c);
        LearnConstants no_future = c;
        no_future.gamma = 0.0;
        CHECK(munchausen_target(sharp, Eigen::VectorXd::Zero(5), 0, 0.25, no_future) == 0.25 - 1.0);
        CHECK(floor == doctest::Approx(-1.0 + 0.9 * 0.03 * std::log(5.0)));
    }

    SUBCASE("vanishing temperature gives expected SARSA") {
        LearnConstants cold = c;
        cold.tau_q = 1e-9;
        const Eigen::VectorXd q_obs = vec({0.1, 0.4, 0.2, 0.3, 0.0});
        const Eigen::VectorXd q_next = vec({0.5, 0.2, 0.9, 0.1, 0.3});
        CHECK(munchausen_target(q_obs, q_next, 1, 0.3, cold) == doctest::Approx(0.3 + 0.9 * 0.9).epsilon(1e-9));
    }
}

TEST_CASE("munchausen target agrees with the scalar oracle") {
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const LearnConstants c;
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::VectorXd q_obs = Eigen::VectorXd::NullaryExpr(5, [&] { return u(gen); });
        const Eigen::VectorXd q_next = Eigen::VectorXd::NullaryExpr(5, [&] { return u(gen); });
        const int a = static_cast<int>(gen() % 5);
        const double r = 0.5 * (u(gen) + 1.0);
        const double got = munchausen_target(q_obs, q_next, a, r, c);
        const double want = oracle::munchausen(to_std(q_obs), to_std(q_next), a, r, c.gamma, c.tau_q, c.clip);
        CHECK(std::abs(got - want) < 1e-10);
        const double bonus = got - r - c.gamma * (oracle::munchausen(to_std(q_obs), to_std(q_next), a, 0.0, 1.0,
                                                                    c.tau_q, c.clip) -
                                                  oracle::munchausen(to_std(q_obs), to_std(q_next), a, 0.0, 0.0,
                                                                    c.tau_q, c.clip));
        CHECK(bonus >= c.clip - 1e-12);
        CHECK(bonus <= 1e-12);
    }
}

TEST_CASE("backprop matches finite differences") {
    std::mt19937_64 gen(12);
    const LearnConstants c;
    for (int seed = 0; seed < 10; ++seed) {
        Rng rng = make_stream(static_cast<std::uint64_t>(seed), StreamPurpose::AgentInit);
        const NetShape shape{6, 5, 4, 5};
        QNetwork net = QNetwork::init_uniform(shape, rng);
        const QNetwork target = QNetwork::init_uniform(shape, rng);
        std::vector<Transition> items;
        for (int k = 0; k < 4; ++k) {
            items.push_back(random_transition(6, gen));
        }
        std::vector<const Transition*> batch;
        for (const auto& tr : items) {
            batch.push_back(&tr);
        }
        const Eigen::VectorXd grad = batch_loss(net, target, batch, c).grad;
        double worst = 0.0;
        for (Eigen::Index p = 0; p < grad.size(); ++p) {
            const double h = 1e-6;
            const double orig = net.params()(p);
            net.params()(p) = orig + h;
            const double up = batch_loss(net, target, batch, c).loss;
            net.params()(p) = orig - h;
            const double down = batch_loss(net, target, batch, c).loss;
            net.params()(p) = orig;
            const double fd = (up - down) / (2 * h);
            if (std::abs(fd) + std::abs(grad(p)) > 1e-7) {
                worst = std::max(worst, oracle::rel_err(fd, grad(p)));
            }
        }
        CHECK(worst < 1e-4);
    }
}

TEST_CASE("training reduces the loss on a fixed batch") {
    // A single-unit chain whose target sits far above its output, so every step descends.
    const NetShape shape{1, 1, 1, 5};
    QNetwork net(shape);
    net.w1().setConstant(0.5);
    net.b1().setConstant(0.1);
    net.w2().setConstant(0.5);
    net.b2().setConstant(0.1);
    net.w3().setConstant(0.5);
    QNetwork target(shape);
    target.b3().setConstant(20.0);
    Transition tr{Eigen::VectorXd::Ones(1), Action::Left, 1.0, Eigen::VectorXd::Ones(1)};
    const Transition* batch[] = {&tr};
    AdamState opt(shape.param_count(), 0.01);
    const LearnConstants c;
    double prev = train_step(net, target, opt, batch, c);
    const double first = prev;
    int increases = 0;
    for (int step = 1; step < 100; ++step) {
        const double loss = train_step(net, target, opt, batch, c);
        increases += loss > prev;
        prev = loss;
    }
    CHECK(increases == 0);
    CHECK(prev < first);
}

TEST_CASE("zero loss leaves parameters in place") {
    const NetShape shape{3, 4, 4, 5};
    QNetwork net(shape);
    LearnConstants c;
    c.gamma = 0.5;
    Transition tr{Eigen::VectorXd::Ones(3), Action::Up, 0.0, Eigen::VectorXd::Ones(3)};
    // Zero network: T = 0 + tau ln(1/5) + gamma * (0 - tau ln(1/5)); set r to cancel it.
    const double bonus = c.tau_q * -std::log(5.0);
    tr.reward = -(bonus - c.gamma * bonus);
    const Transition* batch[] = {&tr};
    AdamState opt(shape.param_count(), c.learning_rate);
    const Eigen::VectorXd before = net.params();
    CHECK(train_step(net, net, opt, batch, c) == doctest::Approx(0.0).epsilon(1e-10));
    CHECK((net.params() - before).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("target sync schedule") {
    std::vector<int> syncs;
    for (int l = 0; l < 20; ++l) {
        if (target_sync_due(l, 19)) {
            syncs.push_back(l);
        }
    }
    CHECK(syncs == std::vector<int>{0, 19});

    Rng rng = make_stream(1, StreamPurpose::AgentInit);
    QNetwork online = QNetwork::init_uniform({3, 2, 2, 5}, rng);
    QNetwork target(online.shape());
    sync_target(online, target);
    const double kept = online.params()(0);
    online.params()(0) += 1.0;
    CHECK(target.params()(0) == kept);
}

TEST_CASE("replay buffer discipline") {
    ReplayBuffer buf(3);
    std::mt19937_64 gen(3);
    for (int k = 0; k < 3; ++k) {
        buf.push(random_transition(2, gen));
    }
    CHECK_THROWS_AS(buf.push(random_transition(2, gen)), std::length_error);
    Rng rng = make_stream(2, StreamPurpose::Agent);
    const auto idx = buf.sample_indices(32, rng);
    CHECK(idx.size() == 32);
    for (auto i : idx) {
        CHECK(i < 3);
    }
    buf.clear();
    CHECK(buf.empty());
}

TEST_CASE("agent learner syncs and records losses") {
    Rng rng = make_stream(4, StreamPurpose::AgentInit);
    std::mt19937_64 gen(4);
    QNetwork online = QNetwork::init_uniform({5, 4, 4, 5}, rng);
    AgentLearner learner(online, 20, 0.01);
    for (int k = 0; k < 20; ++k) {
        learner.buffer.push(random_transition(5, gen));
    }
    LearnConstants c;
    Rng agent = make_stream(4, StreamPurpose::Agent);
    const auto losses = learner.learn(online, 20, c, agent);
    CHECK(losses.size() == 20);
    CHECK(learner.target == online);
    CHECK(learner.optimiser.step == 20);
}

TEST_CASE("checkpoint round trip is exact") {
    Rng rng = make_stream(6, StreamPurpose::AgentInit);
    const QNetwork net = QNetwork::init_uniform({7, 4, 3, 5}, rng);
    std::stringstream io;
    write_checkpoint(io, net);
    CHECK(read_checkpoint(io) == net);
    std::istringstream bad("qnetwork 1\nshape 1 2\n");
    CHECK_THROWS_AS(read_checkpoint(bad), std::runtime_error);
}
