#include "sgrl/env/pendulum.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sgrl::env {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

Pendulum::Pendulum(PendulumParams params) : params_(params) {
    if (!(params_.dt > 0.0) || !(params_.max_torque > 0.0) || !(params_.max_speed > 0.0))
        throw std::invalid_argument("pendulum: dt, max_torque, max_speed must be > 0");
    if (!(params_.reset_angle >= 0.0) || !(params_.reset_speed >= 0.0))
        throw std::invalid_argument("pendulum: reset ranges must be >= 0");
}

double Pendulum::wrap_angle(double theta) {
    double w = std::remainder(theta, 2.0 * kPi);
    if (w <= -kPi)
        w += 2.0 * kPi;
    return w;
}

bool Pendulum::crossed_bottom(double theta_prev, double theta_next) {
    if (theta_prev == kPi || theta_next == kPi)
        return true;
    // Opposite signs with the short arc between them spanning the bottom.
    if ((theta_prev < 0.0) != (theta_next < 0.0) &&
        std::abs(theta_prev) + std::abs(theta_next) > kPi)
        return true;
    return false;
}

Eigen::Vector2d Pendulum::reset(Rng& rng) const {
    Eigen::Vector2d s;
    s(0) = rng.uniform(-params_.reset_angle, params_.reset_angle);
    s(1) = rng.uniform(-params_.reset_speed, params_.reset_speed);
    return s;
}

StepResult Pendulum::step(const Eigen::Vector2d& state, double action) const {
    const double theta = state(0);
    const double thetadot = state(1);
    const double u = std::clamp(action, -params_.max_torque, params_.max_torque);

    StepResult out;
    out.reward = -(theta * theta + 0.1 * thetadot * thetadot + 0.001 * u * u);
    out.cost = out.reward;

    const double g = params_.gravity, m = params_.mass, l = params_.length;
    const double accel = (3.0 * g / (2.0 * l)) * std::sin(theta) + (3.0 / (m * l * l)) * u;
    double new_speed = thetadot + accel * params_.dt;
    new_speed = std::clamp(new_speed, -params_.max_speed, params_.max_speed);
    const double new_theta = wrap_angle(theta + new_speed * params_.dt);

    out.next << new_theta, new_speed;
    out.catastrophe = crossed_bottom(theta, new_theta);
    return out;
}

double Pendulum::energy(const Eigen::Vector2d& state) const {
    const double g = params_.gravity, m = params_.mass, l = params_.length;
    const double inertia = m * l * l / 3.0;
    return 0.5 * inertia * state(1) * state(1) + m * g * (l / 2.0) * std::cos(state(0));
}

} // namespace sgrl::env
