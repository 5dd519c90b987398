#include "nmpc/ocp.hpp"

#include "nmpc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace nmpc {

namespace {

class ShootingProblem {
public:
    ShootingProblem(const ControlSystem& sys, const Vector& x0, int horizon)
        : sys_(sys), x0_(x0), horizon_(horizon), nu_(sys.control_dim()) {}

    int size() const { return horizon_ * nu_; }

    ControlSequence unstack(const Vector& z) const {
        ControlSequence u(horizon_);
        for (int k = 0; k < horizon_; ++k) u[k] = z.segment(k * nu_, nu_);
        return u;
    }

    Vector stack(const ControlSequence& u) const {
        Vector z(size());
        for (int k = 0; k < horizon_; ++k) z.segment(k * nu_, nu_) = u[k];
        return z;
    }

    Vector project(const Vector& z) const {
        if (!sys_.control_bounds()) return z;
        Vector out = z;
        const Box& box = *sys_.control_bounds();
        for (int k = 0; k < horizon_; ++k) out.segment(k * nu_, nu_) = box.project(z.segment(k * nu_, nu_));
        return out;
    }

    /// Cost of z; +inf when the rollout diverges. Caches the nominal trajectory.
    double cost(const Vector& z) {
        ++evaluations_;
        states_.resize(horizon_ + 1);
        prefix_.assign(horizon_ + 1, 0.0);
        states_[0] = x0_;
        try {
            for (int k = 0; k < horizon_; ++k) {
                Transition t = sys_.transition(states_[k], z.segment(k * nu_, nu_));
                prefix_[k + 1] = prefix_[k] + t.cost;
                states_[k + 1] = std::move(t.state);
            }
        } catch (const DivergenceError&) {
            return std::numeric_limits<double>::infinity();
        }
        return prefix_[horizon_];
    }

    /// Central differences at the point of the last cost() call. Perturbing
    /// u_k only changes the trajectory from stage k on.
    Vector gradient(const Vector& z, double rel_step) {
        Vector g(size());
        for (int k = 0; k < horizon_; ++k) {
            for (int i = 0; i < nu_; ++i) {
                const int idx = k * nu_ + i;
                const double h = rel_step * std::max(1.0, std::abs(z[idx]));
                double up = h;
                double down = h;
                if (const auto& box = sys_.control_bounds()) {
                    up = std::min(h, box->upper[i] - z[idx]);
                    down = std::min(h, z[idx] - box->lower[i]);
                }
                Vector zp = z;
                zp[idx] += up;
                Vector zm = z;
                zm[idx] -= down;
                if (up + down <= 0.0) {
                    g[idx] = 0.0;
                    continue;
                }
                const double fp = up > 0.0 ? suffix_cost(zp, k) : prefix_[horizon_] - prefix_[k];
                const double fm = down > 0.0 ? suffix_cost(zm, k) : prefix_[horizon_] - prefix_[k];
                g[idx] = (fp - fm) / (up + down);
            }
        }
        return g;
    }

    long evaluations() const { return evaluations_; }

private:
    double suffix_cost(const Vector& z, int first) {
        ++evaluations_;
        Vector x = states_[first];
        double total = 0.0;
        try {
            for (int k = first; k < horizon_; ++k) {
                Transition t = sys_.transition(x, z.segment(k * nu_, nu_));
                total += t.cost;
                x = std::move(t.state);
            }
        } catch (const DivergenceError&) {
            return std::numeric_limits<double>::infinity();
        } catch (const InputError&) {
            // finite-difference probe stepped outside the control box
            return std::numeric_limits<double>::infinity();
        }
        return total;
    }

    const ControlSystem& sys_;
    const Vector& x0_;
    int horizon_;
    int nu_;
    long evaluations_ = 0;
    StateTrajectory states_;
    std::vector<double> prefix_;
};

// Components sitting on a bound with the gradient pushing outward are frozen.
std::vector<bool> active_set(const ControlSystem& sys, const Vector& z, const Vector& g) {
    std::vector<bool> active(z.size(), false);
    if (!sys.control_bounds()) return active;
    const Box& box = *sys.control_bounds();
    const int nu = sys.control_dim();
    for (Eigen::Index idx = 0; idx < z.size(); ++idx) {
        const int i = static_cast<int>(idx % nu);
        active[idx] = (z[idx] <= box.lower[i] && g[idx] > 0.0) || (z[idx] >= box.upper[i] && g[idx] < 0.0);
    }
    return active;
}

double projected_gradient_norm(const std::vector<bool>& active, const Vector& g) {
    double norm = 0.0;
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        if (!active[i]) norm = std::max(norm, std::abs(g[i]));
    }
    return norm;
}

}  // namespace

RolloutResult rollout(const ControlSystem& sys, const Vector& x0, const ControlSequence& controls) {
    if (controls.empty()) throw InputError("rollout requires at least one control");
    RolloutResult out;
    out.trajectory.reserve(controls.size() + 1);
    out.stage_costs.reserve(controls.size());
    out.trajectory.push_back(x0);
    for (std::size_t k = 0; k < controls.size(); ++k) {
        Transition t;
        try {
            t = sys.transition(out.trajectory.back(), controls[k]);
        } catch (const DivergenceError& e) {
            throw DivergenceError(std::string(e.what()) + " at stage " + std::to_string(k), e.coordinate(),
                                  static_cast<int>(k));
        }
        out.stage_costs.push_back(t.cost);
        out.total_cost += t.cost;
        out.trajectory.push_back(std::move(t.state));
    }
    return out;
}

OcpSolution evaluate_controls(const ControlSystem& sys, const Vector& x0, ControlSequence controls,
                              SolverReport report) {
    RolloutResult r = rollout(sys, x0, controls);
    OcpSolution sol;
    sol.initial_state = x0;
    sol.horizon = static_cast<int>(controls.size());
    sol.controls = std::move(controls);
    sol.trajectory = std::move(r.trajectory);
    sol.stage_costs = std::move(r.stage_costs);
    sol.value = r.total_cost;
    sol.report = report;
    return sol;
}

OcpSolution solve(const ControlSystem& sys, const Vector& x0, int horizon,
                  const std::optional<ControlSequence>& warm_start, const SolverOptions& options) {
    if (horizon < 2) throw InputError("prediction horizon N must be at least 2");
    if (x0.size() != sys.state_dim()) throw InputError("initial state dimension mismatch");
    if (!x0.allFinite()) throw DivergenceError("initial state is not finite", 0);

    ShootingProblem problem(sys, x0, horizon);
    Vector z;
    if (warm_start) {
        if (static_cast<int>(warm_start->size()) != horizon) {
            throw InputError("warm start has length " + std::to_string(warm_start->size()) + ", expected " +
                             std::to_string(horizon));
        }
        for (const Vector& u : *warm_start) {
            if (u.size() != sys.control_dim()) throw InputError("warm start control dimension mismatch");
        }
        z = problem.project(problem.stack(*warm_start));
    } else {
        z = problem.stack(ControlSequence(horizon, sys.equilibrium_control()));
    }

    double f = problem.cost(z);
    if (!std::isfinite(f)) {
        throw DivergenceError("initial guess diverges; cannot start the optimizer", 0);
    }
    Vector g = problem.gradient(z, options.fd_relative_step);
    const int n = problem.size();
    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
    bool fresh_metric = true;

    SolverReport report;
    for (report.iterations = 0; report.iterations < options.max_iterations; ++report.iterations) {
        std::vector<bool> active = active_set(sys, z, g);
        report.gradient_norm = projected_gradient_norm(active, g);
        if (report.gradient_norm <= options.gradient_tolerance) {
            report.converged = true;
            break;
        }

        Vector d = -(H * g);
        for (int i = 0; i < n; ++i) {
            if (active[i]) d[i] = 0.0;
        }
        double slope = g.dot(d);
        if (!(slope < 0.0)) {
            H.setIdentity();
            fresh_metric = true;
            d = -g;
            for (int i = 0; i < n; ++i) {
                if (active[i]) d[i] = 0.0;
            }
            slope = g.dot(d);
        }

        double t = 1.0;
        Vector z_trial;
        double f_trial = f;
        bool accepted = false;
        for (int b = 0; b < options.max_backtracks; ++b) {
            z_trial = problem.project(z + t * d);
            f_trial = problem.cost(z_trial);
            const double predicted = sys.control_bounds() ? g.dot(z_trial - z) : t * slope;
            if (std::isfinite(f_trial) && f_trial <= f + options.armijo * predicted) {
                accepted = true;
                break;
            }
            t *= options.backtrack;
        }

        if (!accepted) {
            if (!fresh_metric) {
                // the quasi-Newton metric went stale; retry along steepest descent
                H.setIdentity();
                fresh_metric = true;
                problem.cost(z);
                continue;
            }
            problem.cost(z);
            break;
        }

        Vector g_trial = problem.gradient(z_trial, options.fd_relative_step);
        const Vector s = z_trial - z;
        const Vector y = g_trial - g;
        const double sy = s.dot(y);
        if (sy > 1e-14 * s.norm() * y.norm() && sy > 0.0) {
            if (fresh_metric) {
                H *= sy / y.squaredNorm();
                fresh_metric = false;
            }
            const double rho = 1.0 / sy;
            const Vector Hy = H * y;
            H += ((1.0 + rho * y.dot(Hy)) * rho) * (s * s.transpose()) - rho * (Hy * s.transpose() + s * Hy.transpose());
        } else {
            H.setIdentity();
            fresh_metric = true;
        }
        z = std::move(z_trial);
        f = f_trial;
        g = std::move(g_trial);
    }
    if (!report.converged) report.gradient_norm = projected_gradient_norm(active_set(sys, z, g), g);
    report.cost_evaluations = problem.evaluations();

    return evaluate_controls(sys, x0, problem.unstack(z), report);
}

double tail_value(const OcpSolution& sol, int j) {
    if (j < 0 || j > sol.horizon - 1) {
        throw InputError("tail index j = " + std::to_string(j) + " outside [0, " + std::to_string(sol.horizon - 1) +
                         "]");
    }
    double head = 0.0;
    for (int k = 0; k < j; ++k) head += sol.stage_costs[k];
    return sol.value - head;
}

ControlSequence shift_warm_start(const OcpSolution& prev, int m) {
    const int N = static_cast<int>(prev.controls.size());
    if (m < 1 || m > N - 1) {
        throw InputError("shift m = " + std::to_string(m) + " outside [1, " + std::to_string(N - 1) + "]");
    }
    ControlSequence out(prev.controls.begin() + m, prev.controls.end());
    out.resize(N, prev.controls.back());
    return out;
}

}  // namespace nmpc
