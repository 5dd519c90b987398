#include "nmpc/dynamics.hpp"
#include "nmpc/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace nmpc;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

// x* from scipy fsolve (xtol 1e-15) on the continuous field with u = 0
const double kXStar[3] = {1.1246037300979126, 0.0, 0.912297424841595};

struct DopCase {
    std::initializer_list<double> x;
    double u;
    double expected[4];  // x1, x2, x3, cost; DOP853 rtol 1e-13 atol 1e-15 on the augmented ODE
};

const DopCase kDopCases[] = {
    {{1.02, 0.1, 1.014}, 0.0, {1.0228651398648985, -0.04257105077928198, 1.0119710448061523, 0.0023063740024205337}},
    {{1.02, 0.1, 1.014}, 0.3, {1.0214270914169044, -0.08533177518740938, 1.0414799924605307, 0.002697697410945395}},
    {{1.2, -0.5, 0.8}, -0.4, {1.1659295199032855, -0.15635362093516214, 0.7636087998910761, 0.014634608941646293}},
};

}  // namespace

TEST(SyncGenParams, Defaults) {
    const SyncGenParams p;
    EXPECT_EQ(p.b1, 34.29);
    EXPECT_EQ(p.b2, 0.0);
    EXPECT_EQ(p.b3, 0.149);
    EXPECT_EQ(p.b4, 0.3341);
    EXPECT_EQ(p.P, 28.22);
    EXPECT_EQ(p.E, 0.2405);
}

TEST(Equilibrium, DefaultParameters) {
    const auto [xs, us] = equilibrium_of(SyncGenParams{});
    ASSERT_EQ(xs.size(), 3);
    ASSERT_EQ(us.size(), 1);
    EXPECT_EQ(us[0], 0.0);
    Vector f(3);
    syncgen_vector_field(SyncGenParams{}, xs, us, f);
    EXPECT_LE(f.lpNorm<Eigen::Infinity>(), 1e-12);
    const double seed[3] = {1.12, 0.0, 0.914};
    for (int i = 0; i < 3; ++i) {
        EXPECT_NEAR(xs[i], seed[i], 5e-3);
        EXPECT_NEAR(xs[i], kXStar[i], 1e-10);
    }
}

TEST(Equilibrium, ClosedFormWithoutCouplingTerm) {
    SyncGenParams p;
    p.b3 = 0.0;
    p.E = 0.30537;  // keeps x3 = E / b4 at 0.914 so the root stays near the seed
    const auto [xs, us] = equilibrium_of(p);
    const double x3 = p.E / p.b4;
    const double x1 = std::asin(p.P / (p.b1 * x3));
    EXPECT_NEAR(xs[0], x1, 1e-10);
    EXPECT_NEAR(xs[1], 0.0, 1e-10);
    EXPECT_NEAR(xs[2], x3, 1e-10);
}

TEST(Equilibrium, FarFromSeedIsANumericError) {
    SyncGenParams p;
    p.E = 1.0;
    EXPECT_THROW(equilibrium_of(p), NumericError);
}

TEST(SyncGen, EquilibriumIsFixedPointWithZeroCost) {
    const ControlSystem sys = make_syncgen();
    const Vector& xs = sys.equilibrium_state();
    const Vector next = step(sys, xs, sys.equilibrium_control());
    EXPECT_LE((next - xs).lpNorm<Eigen::Infinity>(), 1e-8);
    EXPECT_LE(stage_cost(sys, xs, sys.equilibrium_control()), 1e-12);
    EXPECT_FALSE(sys.control_bounds().has_value());
    EXPECT_DOUBLE_EQ(sys.sampling_period(), 0.1);
    EXPECT_DOUBLE_EQ(sys.cost_weight(), 1e-6);
    EXPECT_EQ(sys.substeps(), 10);
}

TEST(SyncGen, StepMatchesHighAccuracyIntegrator) {
    const ControlSystem sys = make_syncgen();
    for (const DopCase& c : kDopCases) {
        const Transition t = sys.transition(vec(c.x), vec({c.u}));
        for (int i = 0; i < 3; ++i) EXPECT_NEAR(t.state[i], c.expected[i], 1e-7) << "coordinate " << i;
        EXPECT_NEAR(t.cost, c.expected[3], 1e-9);
    }
}

TEST(SyncGen, StageCostRefinement) {
    const ControlSystem coarse = make_syncgen();
    const ControlSystem fine = coarse.with_substeps(100);
    const Vector x = vec({1.02, 0.1, 1.014});
    const Vector u = vec({0.0});
    EXPECT_NEAR(coarse.stage_cost(x, u), fine.stage_cost(x, u), 1e-9);
    EXPECT_GT(coarse.stage_cost(x, u), 0.0);
}

TEST(SyncGen, FourthOrderConvergence) {
    const ControlSystem base = make_syncgen();
    const Vector x = vec({1.2, -0.5, 0.8});
    const Vector u = vec({-0.4});
    // a coarse grid keeps the error well above round-off
    const Vector x2 = base.with_substeps(2).step(x, u);
    const Vector x4 = base.with_substeps(4).step(x, u);
    const Vector x8 = base.with_substeps(8).step(x, u);
    const Vector richardson = x8 + (x8 - x4) / 15.0;
    const double e2 = (x2 - richardson).norm();
    const double e4 = (x4 - richardson).norm();
    EXPECT_GE(e2 / e4, 12.0);
}

TEST(SyncGen, StageCostNonnegativeAndPositiveAwayFromEquilibrium) {
    const ControlSystem sys = make_syncgen();
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dx(-0.3, 0.3), du(-1.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        Vector x = sys.equilibrium_state();
        for (int k = 0; k < 3; ++k) x[k] += dx(rng);
        const double c = sys.stage_cost(x, vec({du(rng)}));
        EXPECT_GT(c, 0.0);
    }
}

TEST(SyncGen, DimensionContract) {
    const ControlSystem sys = make_syncgen();
    EXPECT_THROW(step(sys, vec({1.0, 0.0}), vec({0.0})), InputError);
    EXPECT_THROW(stage_cost(sys, vec({1.0, 0.0, 1.0}), vec({0.0, 0.0})), InputError);
    EXPECT_THROW(step(sys, vec({1.0, 0.0, 1.0, 0.0}), vec({0.0})), InputError);
}

TEST(SyncGen, NonFiniteStateIsDivergence) {
    const ControlSystem sys = make_syncgen();
    try {
        step(sys, vec({1.0, std::nan(""), 1.0}), vec({0.0}));
        FAIL() << "expected DivergenceError";
    } catch (const DivergenceError& e) {
        EXPECT_EQ(e.coordinate(), 1);
        EXPECT_NE(std::string(e.what()).find("x2"), std::string::npos);
    }
}

TEST(Sampled, BlowUpNamesCoordinate) {
    // x2' = x2^2 escapes to infinity before t = 1 from x2 = 10
    const ControlSystem sys = ControlSystem::sampled(
        "blowup", [](const Vector& x, const Vector& u, Vector& d) { d[0] = u[0]; d[1] = x[1] * x[1]; }, 2, 1, 1.0, 0.0,
        Vector::Zero(2), Vector::Zero(1));
    try {
        step(sys, vec({0.0, 1e3}), vec({0.0}));
        FAIL() << "expected DivergenceError";
    } catch (const DivergenceError& e) {
        EXPECT_NE(std::string(e.what()).find("x2"), std::string::npos);
    }
}

TEST(Sampled, ExponentialDoubling) {
    const auto field = [](const Vector& x, const Vector& u, Vector& d) { d[0] = x[0] + u[0]; };
    const ControlSystem sys =
        ControlSystem::sampled("exp", field, 1, 1, std::log(2.0), 0.0, Vector::Zero(1), Vector::Zero(1), {}, 100);
    EXPECT_NEAR(step(sys, vec({1.0}), vec({0.0}))[0], 2.0, 1e-9);
    // the default 10-substep grid carries the expected RK4 truncation error only
    const ControlSystem coarse = sys.with_substeps(10);
    EXPECT_NEAR(step(coarse, vec({1.0}), vec({0.0}))[0], 2.0, 1e-6);
}

TEST(Sampled, ZeroIntegrandAtHeldEquilibrium) {
    const auto field = [](const Vector& x, const Vector& u, Vector& d) { d[0] = -x[0] + u[0]; };
    const ControlSystem sys =
        ControlSystem::sampled("stable", field, 1, 1, 0.5, 0.0, Vector::Zero(1), Vector::Zero(1));
    EXPECT_EQ(stage_cost(sys, vec({0.0}), vec({0.0})), 0.0);
    EXPECT_EQ(step(sys, vec({0.0}), vec({0.0}))[0], 0.0);
}

TEST(Sampled, ConstructionValidation) {
    const auto field = [](const Vector& x, const Vector& u, Vector& d) { d[0] = -x[0] + u[0]; };
    EXPECT_THROW(ControlSystem::sampled("s", field, 1, 1, 0.0, 0.0, Vector::Zero(1), Vector::Zero(1)), InputError);
    EXPECT_THROW(ControlSystem::sampled("s", field, 1, 1, 0.1, -1.0, Vector::Zero(1), Vector::Zero(1)), InputError);
    // not an equilibrium
    EXPECT_THROW(ControlSystem::sampled("s", field, 1, 1, 0.1, 0.0, vec({1.0}), Vector::Zero(1)), InputError);
    // u* outside the box
    const Box box{vec({0.5}), vec({1.0})};
    EXPECT_THROW(ControlSystem::sampled("s", field, 1, 1, 0.1, 0.0, Vector::Zero(1), Vector::Zero(1), box),
                 InputError);
}

TEST(Sampled, ControlOutsideBoundsRejected) {
    const auto field = [](const Vector& x, const Vector& u, Vector& d) { d[0] = -x[0] + u[0]; };
    const Box box{vec({-1.0}), vec({1.0})};
    const ControlSystem sys =
        ControlSystem::sampled("s", field, 1, 1, 0.1, 0.0, Vector::Zero(1), Vector::Zero(1), box);
    EXPECT_NO_THROW(step(sys, vec({0.5}), vec({1.0})));
    EXPECT_THROW(step(sys, vec({0.5}), vec({1.5})), InputError);
    EXPECT_EQ(box.project(vec({3.0}))[0], 1.0);
    EXPECT_TRUE(box.contains(vec({-1.0})));
}

TEST(LinearScalar, Examples) {
    const ControlSystem sys = make_linear_scalar(2, 1, 1, 1);
    EXPECT_EQ(step(sys, vec({1.0}), vec({-2.0}))[0], 0.0);
    EXPECT_EQ(stage_cost(sys, vec({1.0}), vec({0.0})), 1.0);
    EXPECT_EQ(stage_cost(sys, vec({0.0}), vec({0.0})), 0.0);
    EXPECT_EQ(stage_cost(sys, vec({1.0}), vec({-2.0})), 5.0);
    EXPECT_FALSE(sys.is_sampled());
    EXPECT_EQ(sys.sampling_period(), 1.0);
    EXPECT_THROW(sys.vector_field(vec({1.0}), vec({0.0})), InputError);
}

TEST(LinearScalar, Validation) {
    EXPECT_THROW(make_linear_scalar(2, 0, 1, 1), InputError);
    EXPECT_THROW(make_linear_scalar(2, 1, 0, 1), InputError);
    EXPECT_THROW(make_linear_scalar(2, 1, 1, -1), InputError);
    const ControlSystem sys = make_linear_scalar(2, 1, 1, 1);
    EXPECT_THROW(step(sys, vec({1.0, 2.0}), vec({0.0})), InputError);
}
