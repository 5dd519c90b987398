#include "nmpc/dynamics.hpp"

#include "nmpc/errors.hpp"

#include <cmath>
#include <string>

namespace nmpc {

namespace {

constexpr double kEquilibriumTolerance = 1e-10;

void require_finite(const Vector& v, const char* what) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i])) {
            throw DivergenceError(std::string(what) + " coordinate x" + std::to_string(i + 1) + " is not finite",
                                  static_cast<int>(i));
        }
    }
}

}  // namespace

bool Box::contains(const Vector& u) const {
    return u.size() == lower.size() && (u.array() >= lower.array()).all() && (u.array() <= upper.array()).all();
}

Vector Box::project(const Vector& u) const { return u.cwiseMax(lower).cwiseMin(upper); }

ControlSystem ControlSystem::sampled(std::string name, VectorField field, int state_dim, int control_dim,
                                     double sampling_period, double cost_weight, Vector equilibrium_state,
                                     Vector equilibrium_control, std::optional<Box> control_bounds, int substeps) {
    if (!field) throw InputError("sampled system requires a vector field");
    if (state_dim <= 0 || control_dim <= 0) throw InputError("state and control dimensions must be positive");
    if (!(sampling_period > 0.0)) throw InputError("sampling period T must be positive");
    if (!(cost_weight >= 0.0)) throw InputError("cost weight lambda must be nonnegative");
    if (substeps < 1) throw InputError("integrator substeps must be at least 1");

    ControlSystem sys;
    sys.name_ = std::move(name);
    sys.field_ = std::move(field);
    sys.state_dim_ = state_dim;
    sys.control_dim_ = control_dim;
    sys.sampling_period_ = sampling_period;
    sys.cost_weight_ = cost_weight;
    sys.substeps_ = substeps;
    sys.x_star_ = std::move(equilibrium_state);
    sys.u_star_ = std::move(equilibrium_control);
    sys.bounds_ = std::move(control_bounds);

    if (sys.x_star_.size() != state_dim || sys.u_star_.size() != control_dim) {
        throw InputError("equilibrium dimensions do not match the system");
    }
    if (sys.bounds_) {
        if (sys.bounds_->lower.size() != control_dim || sys.bounds_->upper.size() != control_dim) {
            throw InputError("control bound dimensions do not match the system");
        }
        if (!sys.bounds_->contains(sys.u_star_)) throw InputError("equilibrium control violates the control bounds");
    }
    Vector residual(state_dim);
    sys.field_(sys.x_star_, sys.u_star_, residual);
    if (residual.lpNorm<Eigen::Infinity>() > kEquilibriumTolerance) {
        throw InputError("vector field does not vanish at the equilibrium (residual " +
                         std::to_string(residual.lpNorm<Eigen::Infinity>()) + ")");
    }
    return sys;
}

ControlSystem ControlSystem::discrete(std::string name, DiscreteMap map, DiscreteCost cost, int state_dim,
                                      int control_dim, Vector equilibrium_state, Vector equilibrium_control,
                                      std::optional<Box> control_bounds) {
    if (!map || !cost) throw InputError("discrete system requires a map and a stage cost");
    if (state_dim <= 0 || control_dim <= 0) throw InputError("state and control dimensions must be positive");

    ControlSystem sys;
    sys.name_ = std::move(name);
    sys.map_ = std::move(map);
    sys.cost_ = std::move(cost);
    sys.state_dim_ = state_dim;
    sys.control_dim_ = control_dim;
    sys.x_star_ = std::move(equilibrium_state);
    sys.u_star_ = std::move(equilibrium_control);
    sys.bounds_ = std::move(control_bounds);

    if (sys.x_star_.size() != state_dim || sys.u_star_.size() != control_dim) {
        throw InputError("equilibrium dimensions do not match the system");
    }
    if (sys.bounds_ && !sys.bounds_->contains(sys.u_star_)) {
        throw InputError("equilibrium control violates the control bounds");
    }
    if ((sys.map_(sys.x_star_, sys.u_star_) - sys.x_star_).lpNorm<Eigen::Infinity>() > kEquilibriumTolerance) {
        throw InputError("equilibrium is not a fixed point of the map");
    }
    return sys;
}

Vector ControlSystem::vector_field(const Vector& x, const Vector& u) const {
    if (!field_) throw InputError("system '" + name_ + "' has no continuous-time vector field");
    validate_inputs(x, u);
    Vector dxdt(state_dim_);
    field_(x, u, dxdt);
    return dxdt;
}

ControlSystem ControlSystem::with_substeps(int substeps) const {
    if (substeps < 1) throw InputError("integrator substeps must be at least 1");
    ControlSystem copy = *this;
    copy.substeps_ = substeps;
    return copy;
}

void ControlSystem::validate_inputs(const Vector& x, const Vector& u) const {
    if (x.size() != state_dim_) {
        throw InputError("state has dimension " + std::to_string(x.size()) + ", expected " +
                         std::to_string(state_dim_));
    }
    if (u.size() != control_dim_) {
        throw InputError("control has dimension " + std::to_string(u.size()) + ", expected " +
                         std::to_string(control_dim_));
    }
    require_finite(x, "input state");
    if (!u.allFinite()) throw InputError("control is not finite");
    if (bounds_ && !bounds_->contains(u)) throw InputError("control violates the control bounds");
}

Transition ControlSystem::transition(const Vector& x, const Vector& u) const {
    validate_inputs(x, u);

    if (!field_) {
        Transition out{map_(x, u), cost_(x, u)};
        require_finite(out.state, "successor state");
        if (!std::isfinite(out.cost)) throw DivergenceError("stage cost is not finite", -1);
        return out;
    }

    // Classical RK4 on the state augmented by the running cost.
    const double h = sampling_period_ / substeps_;
    const double control_term = cost_weight_ * (u - u_star_).squaredNorm();
    const auto running = [&](const Vector& z) { return (z - x_star_).squaredNorm() + control_term; };

    Vector z = x;
    Vector k1(state_dim_), k2(state_dim_), k3(state_dim_), k4(state_dim_), probe(state_dim_);
    double cost = 0.0;
    for (int s = 0; s < substeps_; ++s) {
        field_(z, u, k1);
        const double c1 = running(z);
        probe.noalias() = z + 0.5 * h * k1;
        field_(probe, u, k2);
        const double c2 = running(probe);
        probe.noalias() = z + 0.5 * h * k2;
        field_(probe, u, k3);
        const double c3 = running(probe);
        probe.noalias() = z + h * k3;
        field_(probe, u, k4);
        const double c4 = running(probe);
        z.noalias() += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        cost += (h / 6.0) * (c1 + 2.0 * c2 + 2.0 * c3 + c4);
    }
    require_finite(z, "successor state");
    if (!std::isfinite(cost)) throw DivergenceError("stage cost is not finite", -1);
    return {std::move(z), cost};
}

void syncgen_vector_field(const SyncGenParams& p, const Vector& x, const Vector& u, Vector& dxdt) {
    dxdt[0] = x[1];
    dxdt[1] = -p.b1 * x[2] * std::sin(x[0]) - p.b2 * x[1] + p.P;
    dxdt[2] = p.b3 * std::cos(x[0]) - p.b4 * x[2] + p.E + u[0];
}

std::pair<Vector, Vector> equilibrium_of(const SyncGenParams& p) {
    Vector x(3);
    x << 1.12, 0.0, 0.914;
    const Vector u = Vector::Zero(1);
    Vector F(3);
    for (int iter = 0; iter < 50; ++iter) {
        syncgen_vector_field(p, x, u, F);
        if (F.lpNorm<Eigen::Infinity>() <= 1e-12) {
            Vector guess(3);
            guess << 1.12, 0.0, 0.914;
            if ((x - guess).lpNorm<Eigen::Infinity>() > 5e-3) {
                throw NumericError("generator equilibrium converged away from (1.12, 0, 0.914)");
            }
            return {x, u};
        }
        Eigen::Matrix3d J;
        J << 0.0, 1.0, 0.0,
             -p.b1 * x[2] * std::cos(x[0]), -p.b2, -p.b1 * std::sin(x[0]),
             -p.b3 * std::sin(x[0]), 0.0, -p.b4;
        x -= J.fullPivLu().solve(F);
        if (!x.allFinite()) break;
    }
    throw NumericError("Newton iteration for the generator equilibrium did not converge in 50 iterations");
}

ControlSystem make_syncgen(const SyncGenParams& params, double sampling_period, double cost_weight,
                           int substeps) {
    auto [x_star, u_star] = equilibrium_of(params);
    auto field = [params](const Vector& x, const Vector& u, Vector& dxdt) {
        syncgen_vector_field(params, x, u, dxdt);
    };
    return ControlSystem::sampled("syncgen", field, 3, 1, sampling_period, cost_weight, std::move(x_star),
                                  std::move(u_star), std::nullopt, substeps);
}

ControlSystem make_linear_scalar(double a, double b, double q, double r, std::optional<Box> control_bounds) {
    if (b == 0.0) throw InputError("linear scalar system with b = 0 is uncontrollable");
    if (!(q > 0.0) || !(r > 0.0)) throw InputError("linear scalar weights q and r must be positive");
    auto map = [a, b](const Vector& x, const Vector& u) {
        Vector next(1);
        next[0] = a * x[0] + b * u[0];
        return next;
    };
    auto cost = [q, r](const Vector& x, const Vector& u) { return q * x[0] * x[0] + r * u[0] * u[0]; };
    return ControlSystem::discrete("linear_scalar", map, cost, 1, 1, Vector::Zero(1), Vector::Zero(1),
                                   std::move(control_bounds));
}

}  // namespace nmpc
