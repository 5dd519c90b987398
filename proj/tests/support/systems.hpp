#pragma once

#include "nmpc/dynamics.hpp"

namespace fixture {

// x+ = (x1 + x2, x2 + u), l = x1^2 + r u^2. With N = 4 and alpha_bar = 0.99 its
// one-step inequality fails on the first blocks, so it exercises m_n >= 2 and splices.
inline nmpc::ControlSystem double_integrator(double r = 0.1) {
    using nmpc::Vector;
    auto map = [](const Vector& x, const Vector& u) {
        Vector y(2);
        y << x[0] + x[1], x[1] + u[0];
        return y;
    };
    auto cost = [r](const Vector& x, const Vector& u) { return x[0] * x[0] + r * u[0] * u[0]; };
    return nmpc::ControlSystem::discrete("double_integrator", map, cost, 2, 1, Vector::Zero(2), Vector::Zero(1));
}

inline nmpc::Vector syncgen_x0() {
    nmpc::Vector x(3);
    x << 1.02, 0.1, 1.014;
    return x;
}

}  // namespace fixture
