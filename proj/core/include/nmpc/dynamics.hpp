#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace nmpc {

using Vector = Eigen::VectorXd;
using ControlSequence = std::vector<Vector>;
using StateTrajectory = std::vector<Vector>;

struct Box {
    Vector lower;
    Vector upper;

    bool contains(const Vector& u) const;
    Vector project(const Vector& u) const;
};

/// Successor state together with the stage cost accumulated over one sampling period.
struct Transition {
    Vector state;
    double cost = 0.0;
};

/// Parameters of the three-state synchronous generator benchmark.
struct SyncGenParams {
    double b1 = 34.29;
    double b2 = 0.0;
    double b3 = 0.149;
    double b4 = 0.3341;
    double P = 28.22;
    double E = 0.2405;
};

/**
 * A discrete-time control system x+ = f(x, u) with stage cost l(x, u).
 *
 * Two flavours exist. A sampled system holds a continuous-time vector field
 * and derives f by zero-order hold over one sampling period T, integrating
 * with fixed-step RK4; its stage cost is the integral of
 * |x(t) - x*|^2 + lambda |u - u*|^2 over the period, accumulated as an extra
 * state on the same grid. A discrete system supplies f and l directly.
 *
 * Instances are immutable and cheap to copy (the callables are shared).
 */
class ControlSystem {
public:
    /// dx/dt written into `dxdt`; must not allocate for speed-critical use.
    using VectorField = std::function<void(const Vector& x, const Vector& u, Vector& dxdt)>;
    using DiscreteMap = std::function<Vector(const Vector& x, const Vector& u)>;
    using DiscreteCost = std::function<double(const Vector& x, const Vector& u)>;

    static ControlSystem sampled(std::string name, VectorField field, int state_dim, int control_dim,
                                 double sampling_period, double cost_weight, Vector equilibrium_state,
                                 Vector equilibrium_control, std::optional<Box> control_bounds = std::nullopt,
                                 int substeps = 10);

    static ControlSystem discrete(std::string name, DiscreteMap map, DiscreteCost cost, int state_dim,
                                  int control_dim, Vector equilibrium_state, Vector equilibrium_control,
                                  std::optional<Box> control_bounds = std::nullopt);

    const std::string& name() const noexcept { return name_; }
    int state_dim() const noexcept { return state_dim_; }
    int control_dim() const noexcept { return control_dim_; }
    bool is_sampled() const noexcept { return static_cast<bool>(field_); }
    /// Sampling period; 1 for discrete systems (time axis = step index).
    double sampling_period() const noexcept { return sampling_period_; }
    double cost_weight() const noexcept { return cost_weight_; }
    int substeps() const noexcept { return substeps_; }
    const Vector& equilibrium_state() const noexcept { return x_star_; }
    const Vector& equilibrium_control() const noexcept { return u_star_; }
    const std::optional<Box>& control_bounds() const noexcept { return bounds_; }

    /// Continuous-time vector field; throws InputError on a discrete system.
    Vector vector_field(const Vector& x, const Vector& u) const;

    /// Same system integrated with a different number of RK4 substeps.
    ControlSystem with_substeps(int substeps) const;

    /// Successor state and stage cost in one pass.
    Transition transition(const Vector& x, const Vector& u) const;
    Vector step(const Vector& x, const Vector& u) const { return transition(x, u).state; }
    double stage_cost(const Vector& x, const Vector& u) const { return transition(x, u).cost; }

private:
    ControlSystem() = default;
    void validate_inputs(const Vector& x, const Vector& u) const;

    std::string name_;
    VectorField field_;
    DiscreteMap map_;
    DiscreteCost cost_;
    int state_dim_ = 0;
    int control_dim_ = 0;
    double sampling_period_ = 1.0;
    double cost_weight_ = 0.0;
    int substeps_ = 1;
    Vector x_star_;
    Vector u_star_;
    std::optional<Box> bounds_;
};

/// Free-function spellings used throughout the library.
inline Vector step(const ControlSystem& sys, const Vector& x, const Vector& u) { return sys.step(x, u); }
inline double stage_cost(const ControlSystem& sys, const Vector& x, const Vector& u) {
    return sys.stage_cost(x, u);
}

/// Continuous-time synchronous generator vector field (control enters the third equation).
void syncgen_vector_field(const SyncGenParams& p, const Vector& x, const Vector& u, Vector& dxdt);

/// Equilibrium of the generator for u = 0, refined by Newton from (1.12, 0, 0.914).
std::pair<Vector, Vector> equilibrium_of(const SyncGenParams& params);

/// Synchronous generator benchmark; defaults T = 0.1, lambda = 1e-6, no control bounds.
ControlSystem make_syncgen(const SyncGenParams& params = {}, double sampling_period = 0.1,
                           double cost_weight = 1e-6, int substeps = 10);

/// x+ = a x + b u with stage cost q x^2 + r u^2 and equilibrium (0, 0).
ControlSystem make_linear_scalar(double a, double b, double q, double r,
                                 std::optional<Box> control_bounds = std::nullopt);

}  // namespace nmpc
