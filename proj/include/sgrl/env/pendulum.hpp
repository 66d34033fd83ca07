#pragma once

#include "sgrl/util/rng.hpp"

#include <Eigen/Dense>

namespace sgrl::env {

struct PendulumParams {
    double dt = 0.05;
    double gravity = 10.0;
    double mass = 1.0;
    double length = 1.0;
    double max_speed = 8.0;
    double max_torque = 2.0;
    // Reset draws theta ~ U(-reset_angle, reset_angle),
    // thetadot ~ U(-reset_speed, reset_speed).
    double reset_angle = 0.2;
    double reset_speed = 0.3;
};

struct StepResult {
    Eigen::Vector2d next;   // (theta, thetadot) after the step
    double reward = 0.0;    // quadratic state/action penalty, always <= 0
    double cost = 0.0;      // safety signal; equal to the reward here
    bool catastrophe = false; // the pendulum passed through the hanging-down position
};

// Torque-limited inverted pendulum.  State is (theta, thetadot) with theta
// measured from upright and wrapped to (-pi, pi]; the unsafe event is the pole
// swinging through the bottom (theta = +-pi).  Dynamics integrate
// thetaddot = (3 g / 2 l) sin(theta) + (3 / m l^2) u with semi-implicit Euler:
// velocity updates first, then the angle uses the new velocity.
class Pendulum {
public:
    explicit Pendulum(PendulumParams params = {});

    const PendulumParams& params() const { return params_; }

    Eigen::Vector2d reset(Rng& rng) const;

    // Advance one step from `state` under torque `action` (clipped to the
    // torque limit before use).
    StepResult step(const Eigen::Vector2d& state, double action) const;

    // Map any angle to (-pi, pi].
    static double wrap_angle(double theta);

    // True when moving from theta_prev to theta_next passes through or lands
    // exactly on the hanging-down position.
    static bool crossed_bottom(double theta_prev, double theta_next);

    // Mechanical energy of the rod, (1/6) thetadot^2 + 5 cos(theta) for the
    // default parameters; used to sanity-check the integrator.
    double energy(const Eigen::Vector2d& state) const;

private:
    PendulumParams params_;
};

} // namespace sgrl::env
