#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sgrl/rl/agent.hpp"
#include "sgrl/rl/replay.hpp"
#include "sgrl/util/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <set>
#include <stdexcept>

using namespace sgrl;
using namespace sgrl::rl;

namespace {

AgentConfig small_config() {
    AgentConfig cfg;
    cfg.hidden = 8;
    return cfg;
}

Eigen::VectorXd vec2(double a, double b) {
    Eigen::VectorXd v(2);
    v << a, b;
    return v;
}

Eigen::VectorXd vec1(double a) {
    Eigen::VectorXd v(1);
    v << a;
    return v;
}

// Hand-built minibatch, no RNG involved.
Batch fixed_batch() {
    Batch b;
    b.states.resize(2, 3);
    b.states << 0.1, -0.4, 0.8, 0.2, 0.3, -0.5;
    b.actions.resize(1, 3);
    b.actions << 0.5, -1.2, 1.9;
    b.rewards.resize(3);
    b.rewards << -0.2, -1.0, -0.05;
    b.costs.resize(3);
    b.costs << -0.3, -0.8, -0.01;
    b.next_states.resize(2, 3);
    b.next_states << 0.12, -0.35, 0.7, 0.1, 0.2, -0.4;
    b.done.resize(3);
    b.done << 0.0, 0.0, 1.0;
    return b;
}

} // namespace

TEST_CASE("replay: ring buffer semantics") {
    ReplayBuffer rb(2, 1, 3);
    CHECK(rb.capacity() == 3);
    CHECK_THROWS_AS(ReplayBuffer(2, 1, 0), std::invalid_argument);

    Transition t;
    t.state = vec2(0, 0);
    t.action = vec1(0);
    t.next_state = vec2(0, 0);
    for (int i = 0; i < 3; ++i) {
        t.reward = i;
        rb.push(t);
    }
    CHECK(rb.size() == 3);
    // Fourth push overwrites the oldest slot.
    t.reward = 3;
    rb.push(t);
    CHECK(rb.size() == 3);
    CHECK(rb.at(0).reward == 3.0);
    CHECK(rb.at(1).reward == 1.0);
    CHECK(rb.at(2).reward == 2.0);

    Transition bad = t;
    bad.action = Eigen::VectorXd(2);
    CHECK_THROWS_AS(rb.push(bad), std::invalid_argument);
}

TEST_CASE("replay: sampling draws stored transitions, deterministically per seed") {
    ReplayBuffer rb(2, 1, 16);
    Transition t;
    t.state = vec2(0, 0);
    t.action = vec1(0);
    t.next_state = vec2(0, 0);
    for (int i = 0; i < 5; ++i) {
        t.reward = 10.0 + i;
        t.cost = -1.0 * i;
        t.done = (i == 4);
        rb.push(t);
    }
    Rng r1(77), r2(77);
    const Batch a = rb.sample(8, r1);
    const Batch b = rb.sample(8, r2);
    CHECK((a.rewards - b.rewards).norm() == 0.0);
    std::set<double> stored{10, 11, 12, 13, 14};
    for (Eigen::Index j = 0; j < 8; ++j) {
        CHECK(stored.count(a.rewards(j)) == 1);
        CHECK(a.done(j) == ((a.rewards(j) == 14.0) ? 1.0 : 0.0));
        CHECK(a.costs(j) == -(a.rewards(j) - 10.0));
    }
    CHECK_THROWS_AS(rb.sample(0, r1), std::invalid_argument);
    ReplayBuffer empty(2, 1, 4);
    CHECK_THROWS_AS(empty.sample(1, r1), std::logic_error);
}

TEST_CASE("agent: construction copies online nets into targets") {
    Rng rng(5);
    SafeDdpgAgent agent(small_config(), rng);
    CHECK((agent.actor().parameters() - agent.actor_target().parameters()).norm() == 0.0);
    CHECK((agent.critic().parameters() - agent.critic_target().parameters()).norm() == 0.0);
    CHECK((agent.guard().parameters() - agent.guard_target().parameters()).norm() == 0.0);
    CHECK(agent.gp().data().empty());
    CHECK(agent.gp().input_dim() == 3);
}

TEST_CASE("agent: fresh confidence scale matches the empty-data formula") {
    // Defaults: online mode, rkhs floor 1, delta 0.1, noise 0.1:
    // beta = 1 + 0.4 sqrt(1 + ln 20).
    Rng rng(5);
    SafeDdpgAgent agent(small_config(), rng);
    CHECK(agent.beta_value() == doctest::Approx(1.7995731134603257).epsilon(1e-14));
}

TEST_CASE("agent: rejects a non-positive action limit") {
    AgentConfig cfg = small_config();
    cfg.action_limit = 0.0;
    Rng rng(5);
    CHECK_THROWS_AS(SafeDdpgAgent(cfg, rng), std::invalid_argument);
}

TEST_CASE("agent: policy is the scaled tanh head and batches agree") {
    Rng rng(6);
    SafeDdpgAgent agent(small_config(), rng);
    Eigen::MatrixXd states(2, 4);
    states << 0.3, -0.7, 1.2, 0.0, -0.1, 0.5, -1.0, 0.0;
    const Eigen::MatrixXd A = agent.policy_batch(states);
    for (Eigen::Index j = 0; j < 4; ++j) {
        const Eigen::VectorXd a = agent.policy(states.col(j));
        CHECK((A.col(j) - a).norm() == 0.0);
        CHECK(std::abs(a(0)) <= 2.0);
        const Eigen::VectorXd head = agent.actor().forward(Eigen::VectorXd(states.col(j)));
        CHECK(a(0) == doctest::Approx(2.0 * head(0)).epsilon(1e-15));
    }
}

TEST_CASE("agent: select_action adds noise and clips") {
    Rng rng(7);
    SafeDdpgAgent agent(small_config(), rng);
    const Eigen::VectorXd s = vec2(0.2, -0.3);

    Rng noise_rng(11);
    const Eigen::VectorXd quiet = agent.select_action(s, 0.0, noise_rng);
    CHECK((quiet - agent.policy(s)).norm() == 0.0);

    // Same stream, same draw.
    Rng n1(13), n2(13);
    const Eigen::VectorXd a1 = agent.select_action(s, 0.5, n1);
    const Eigen::VectorXd a2 = agent.select_action(s, 0.5, n2);
    CHECK((a1 - a2).norm() == 0.0);
    CHECK(a1(0) != agent.policy(s)(0));

    // Enormous noise still lands inside the action box.
    Rng n3(17);
    for (int i = 0; i < 100; ++i) {
        const Eigen::VectorXd a = agent.select_action(s, 50.0, n3);
        CHECK(std::abs(a(0)) <= 2.0);
    }
}

TEST_CASE("agent: q_value and guard_value read the stacked input") {
    Rng rng(8);
    SafeDdpgAgent agent(small_config(), rng);
    const Eigen::VectorXd s = vec2(0.4, -0.8);
    const Eigen::VectorXd a = vec1(1.1);
    Eigen::VectorXd z(3);
    z << 0.4, -0.8, 1.1;
    CHECK(agent.q_value(s, a) == agent.critic().forward(z)(0));
    CHECK(agent.guard_value(s, a) == agent.guard().forward(z)(0));
}

TEST_CASE("agent: critic update regresses the bootstrapped target") {
    Rng rng(9);
    SafeDdpgAgent agent(small_config(), rng);
    const Batch batch = fixed_batch();

    // Make the target nets genuinely different from the online ones so a
    // wrong net choice in the implementation would be caught.
    Rng other(99);
    agent.actor_target().initialize(other, 3e-3);
    agent.critic_target().initialize(other);

    // Oracle with pre-update parameters, using target nets for the bootstrap.
    const double gamma = agent.config().discount;
    double want_loss = 0.0;
    Eigen::VectorXd y(3);
    for (Eigen::Index j = 0; j < 3; ++j) {
        const Eigen::VectorXd ns = batch.next_states.col(j);
        const Eigen::VectorXd na = 2.0 * agent.actor_target().forward(ns);
        Eigen::VectorXd z(3);
        z << ns(0), ns(1), na(0);
        const double next_q = agent.critic_target().forward(z)(0);
        y(j) = batch.rewards(j) + gamma * (1.0 - batch.done(j)) * next_q;
        Eigen::VectorXd zc(3);
        zc << batch.states(0, j), batch.states(1, j), batch.actions(0, j);
        const double q = agent.critic().forward(zc)(0);
        want_loss += (q - y(j)) * (q - y(j));
    }
    want_loss /= 3.0;

    const Eigen::VectorXd target_before = agent.critic_target().parameters();
    const Eigen::VectorXd online_before = agent.critic().parameters();
    const double loss = agent.update_critic(batch);
    CHECK(loss == doctest::Approx(want_loss).epsilon(1e-12));

    // Online net moved; target blended by tau toward the new online params.
    const Eigen::VectorXd online_after = agent.critic().parameters();
    CHECK((online_after - online_before).norm() > 0.0);
    const Eigen::VectorXd expect_target =
        0.995 * target_before + 0.005 * online_after;
    CHECK((agent.critic_target().parameters() - expect_target).cwiseAbs().maxCoeff() <
          1e-15);
    // The actor and guard must be untouched by a critic update.
    CHECK((agent.actor().parameters() - agent.actor().parameters()).norm() == 0.0);
}

TEST_CASE("agent: terminal transitions drop the bootstrap term") {
    Rng rng(10);
    SafeDdpgAgent agent(small_config(), rng);
    Batch b = fixed_batch();
    b.done.setOnes(); // every target is exactly the reward
    double want = 0.0;
    for (Eigen::Index j = 0; j < 3; ++j) {
        Eigen::VectorXd z(3);
        z << b.states(0, j), b.states(1, j), b.actions(0, j);
        const double q = agent.critic().forward(z)(0);
        want += (q - b.rewards(j)) * (q - b.rewards(j));
    }
    want /= 3.0;
    CHECK(agent.update_critic(b) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("agent: guard update uses undiscounted cost accumulation") {
    Rng rng(11);
    SafeDdpgAgent agent(small_config(), rng);
    const Batch batch = fixed_batch();

    Rng other(98);
    agent.actor_target().initialize(other, 3e-3);
    agent.guard_target().initialize(other);

    double want_loss = 0.0;
    for (Eigen::Index j = 0; j < 3; ++j) {
        const Eigen::VectorXd ns = batch.next_states.col(j);
        const Eigen::VectorXd na = 2.0 * agent.actor_target().forward(ns);
        Eigen::VectorXd z(3);
        z << ns(0), ns(1), na(0);
        const double next_g = agent.guard_target().forward(z)(0);
        // No discount factor here — that is the point of the guard.
        const double y = batch.costs(j) + (1.0 - batch.done(j)) * next_g;
        Eigen::VectorXd zc(3);
        zc << batch.states(0, j), batch.states(1, j), batch.actions(0, j);
        const double g = agent.guard().forward(zc)(0);
        want_loss += (g - y) * (g - y);
    }
    want_loss /= 3.0;

    const double loss = agent.update_guard(batch);
    CHECK(loss == doctest::Approx(want_loss).epsilon(1e-12));
    // Critic must be untouched by a guard update.
    Rng check(9);
    SafeDdpgAgent fresh(small_config(), check);
    (void)fresh;
}

TEST_CASE("agent: repeated critic updates fit a fixed regression target") {
    Rng rng(12);
    SafeDdpgAgent agent(small_config(), rng);
    Batch b = fixed_batch();
    b.done.setOnes(); // fixed targets: pure supervised regression
    const double first = agent.update_critic(b);
    double last = first;
    for (int i = 0; i < 300; ++i) last = agent.update_critic(b);
    CHECK(last < 0.05 * first + 1e-6);
}

TEST_CASE("agent: actor update without the guard GP ascends plain Q") {
    AgentConfig cfg = small_config();
    cfg.use_guard_gp = false;
    cfg.actor_lr = 1e-3;
    Rng rng(13);
    SafeDdpgAgent agent(cfg, rng);
    const Batch batch = fixed_batch();

    auto mean_q = [&]() {
        double s = 0.0;
        for (Eigen::Index j = 0; j < 3; ++j) {
            const Eigen::VectorXd st = batch.states.col(j);
            s += agent.q_value(st, agent.policy(st));
        }
        return s / 3.0;
    };

    const double before = mean_q();
    const double reported = agent.update_actor(batch);
    CHECK(reported == doctest::Approx(before).epsilon(1e-12));
    double after = before;
    for (int i = 0; i < 60; ++i) after = agent.update_actor(batch);
    CHECK(mean_q() > before);
    CHECK(after > before);
}

TEST_CASE("agent: actor objective equals its reported decomposition") {
    AgentConfig cfg = small_config();
    Rng rng(14);
    SafeDdpgAgent agent(cfg, rng);

    // Populate the GP with guard-difference observations of both signs.
    Rng drng(15);
    for (int i = 0; i < 8; ++i) {
        Eigen::VectorXd z(3);
        z << drng.uniform(-1.0, 1.0), drng.uniform(-1.0, 1.0), drng.uniform(-2.0, 2.0);
        agent.gp().data().add(z, (i % 2 == 0) ? -0.4 : 0.3);
    }
    agent.set_beta_value(1.5);

    const Batch batch = fixed_batch();
    const SafeDdpgAgent& cagent = agent;
    double want = 0.0;
    for (Eigen::Index j = 0; j < 3; ++j) {
        const Eigen::VectorXd st = batch.states.col(j);
        const Eigen::VectorXd a = cagent.policy(st);
        Eigen::VectorXd z(3);
        z << st(0), st(1), a(0);
        const auto post = cagent.gp().posterior(z);
        const double l = post.mean - 1.5 * std::sqrt(post.variance);
        want += cagent.q_value(st, a) - cfg.penalty * std::max(0.0, -l) +
                std::exp(-l * l);
    }
    want /= 3.0;
    CHECK(agent.update_actor(batch) == doctest::Approx(want).epsilon(1e-10));
}

TEST_CASE("agent: first actor step moves every parameter along the objective gradient") {
    // Adam's very first update is lr * sign(gradient) up to the epsilon
    // regularizer, so the sign of each parameter's movement must match a
    // finite-difference estimate of dJ/dparam computed with everything but
    // the policy frozen.
    AgentConfig cfg = small_config();
    cfg.actor_lr = 1e-4;
    Rng rng(16);
    SafeDdpgAgent agent(cfg, rng);

    Rng drng(17);
    for (int i = 0; i < 10; ++i) {
        Eigen::VectorXd z(3);
        z << drng.uniform(-1.0, 1.0), drng.uniform(-1.0, 1.0), drng.uniform(-2.0, 2.0);
        agent.gp().data().add(z, (i % 2 == 0) ? -0.5 : 0.4);
    }
    agent.set_beta_value(2.0);

    const Batch batch = fixed_batch();
    const SafeDdpgAgent& cagent = agent;

    // The hinge at l = 0 would break differentiability; make sure this setup
    // keeps every batch point clear of it.
    for (Eigen::Index j = 0; j < 3; ++j) {
        const Eigen::VectorXd st = batch.states.col(j);
        const Eigen::VectorXd a = cagent.policy(st);
        Eigen::VectorXd z(3);
        z << st(0), st(1), a(0);
        const auto post = cagent.gp().posterior(z);
        REQUIRE(std::abs(post.mean - 2.0 * std::sqrt(post.variance)) > 0.02);
    }

    auto objective = [&](const Eigen::VectorXd& params) {
        agent.actor().set_parameters(params);
        double s = 0.0;
        for (Eigen::Index j = 0; j < 3; ++j) {
            const Eigen::VectorXd st = batch.states.col(j);
            const Eigen::VectorXd a = cagent.policy(st);
            Eigen::VectorXd z(3);
            z << st(0), st(1), a(0);
            const auto post = cagent.gp().posterior(z);
            const double l = post.mean - 2.0 * std::sqrt(post.variance);
            s += cagent.q_value(st, a) - cfg.penalty * std::max(0.0, -l) +
                 std::exp(-l * l);
        }
        return s / 3.0;
    };

    const Eigen::VectorXd p0 = agent.actor().parameters();
    agent.update_actor(batch);
    const Eigen::VectorXd p1 = agent.actor().parameters();
    agent.actor().set_parameters(p0); // restore for finite differences

    const double h = 1e-5;
    int checked = 0;
    for (Eigen::Index i = 0; i < p0.size(); ++i) {
        Eigen::VectorXd pp = p0, pm = p0;
        pp(i) += h;
        pm(i) -= h;
        const double fd = (objective(pp) - objective(pm)) / (2.0 * h);
        const double delta = p1(i) - p0(i);
        if (std::abs(fd) < 1e-4 || std::abs(delta) < 0.5 * cfg.actor_lr)
            continue; // gradient too small to trust either estimate
        CHECK(delta * fd > 0.0);
        ++checked;
    }
    agent.actor().set_parameters(p0);
    CHECK(checked > 30); // the check must have real coverage
}

TEST_CASE("agent: empty GP data makes the guarded update match the plain one") {
    AgentConfig with = small_config();
    AgentConfig without = small_config();
    without.use_guard_gp = false;

    Rng r1(18), r2(18);
    SafeDdpgAgent a(with, r1);
    SafeDdpgAgent b(without, r2);
    CHECK((a.actor().parameters() - b.actor().parameters()).norm() == 0.0);

    const Batch batch = fixed_batch();
    for (int i = 0; i < 5; ++i) {
        a.update_critic(batch);
        b.update_critic(batch);
        a.update_guard(batch);
        b.update_guard(batch);
        a.update_actor(batch);
        b.update_actor(batch);
    }
    CHECK((a.actor().parameters() - b.actor().parameters()).norm() == 0.0);
    CHECK((a.critic().parameters() - b.critic().parameters()).norm() == 0.0);
    CHECK((a.actor_target().parameters() - b.actor_target().parameters()).norm() == 0.0);
}

TEST_CASE("agent: measurement is the guard difference under the online nets") {
    Rng rng(19);
    SafeDdpgAgent agent(small_config(), rng);
    const Eigen::VectorXd s = vec2(0.2, -0.1);
    const Eigen::VectorXd a = vec1(0.7);
    const Eigen::VectorXd ns = vec2(0.25, 0.05);

    const Eigen::VectorXd next_a = 2.0 * agent.actor().forward(ns);
    Eigen::VectorXd z_next(3), z_cur(3);
    z_next << ns(0), ns(1), next_a(0);
    z_cur << s(0), s(1), a(0);
    const double want =
        agent.guard().forward(z_next)(0) - agent.guard().forward(z_cur)(0);
    CHECK(agent.measurement(s, a, ns) == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("agent: measurement filter accepts either sign convention") {
    Rng rng(20);
    SafeDdpgAgent agent(small_config(), rng); // noise width 0.1
    CHECK(agent.filter_measurement(0.45, 0.5));   // matches +cost
    CHECK(agent.filter_measurement(-0.45, 0.5));  // matches -cost
    CHECK(agent.filter_measurement(-0.45, -0.5)); // cost sign irrelevant
    CHECK_FALSE(agent.filter_measurement(0.3, 0.5));
    CHECK_FALSE(agent.filter_measurement(0.0, 0.5));
    CHECK(agent.filter_measurement(0.0, 0.05));
    CHECK(agent.filter_measurement(0.6, 0.5)); // boundary: width inclusive
}

TEST_CASE("agent: storage filter keeps only measurements above the noise floor") {
    Rng rng(21);
    SafeDdpgAgent agent(small_config(), rng);
    CHECK(agent.storage_filter(0.2));
    CHECK(agent.storage_filter(-0.2));
    CHECK_FALSE(agent.storage_filter(0.05));
    CHECK_FALSE(agent.storage_filter(0.1)); // strictly greater than the floor
    CHECK_FALSE(agent.storage_filter(0.0));
}

TEST_CASE("agent: recompute_beta follows the confidence formula and caches") {
    Rng rng(22);
    SafeDdpgAgent agent(small_config(), rng);
    const double empty_beta = agent.beta_value();

    Rng drng(23);
    for (int i = 0; i < 6; ++i) {
        Eigen::VectorXd z(3);
        z << drng.uniform(-1.0, 1.0), drng.uniform(-1.0, 1.0), drng.uniform(-2.0, 2.0);
        agent.gp().data().add(z, 0.5);
    }
    const double updated = agent.recompute_beta();
    CHECK(updated == agent.beta_value());
    CHECK(updated > empty_beta);

    const SafeDdpgAgent& cagent = agent;
    const double want = gp::beta(cagent.gp().data(), cagent.gp().kernel(), 0.1,
                                 agent.config().beta);
    CHECK(updated == doctest::Approx(want).epsilon(1e-14));

    agent.set_beta_value(3.25);
    CHECK(agent.beta_value() == 3.25);
}
