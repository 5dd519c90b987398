#include "nmpc/errors.hpp"
#include "nmpc/mpc_loop.hpp"
#include "oracles.hpp"
#include "systems.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace nmpc;

namespace {

Vector scalar(double v) { return Vector::Constant(1, v); }

RunOptions double_integrator_options() {
    RunOptions o;
    o.steps = 30;
    o.stop_tolerance = 1e-6;
    return o;
}

void expect_schedule_integrity(const ExecutionLog& log) {
    EXPECT_TRUE(log.schedule.is_valid(log.horizon));
    const std::vector<int> gaps = log.schedule.gaps();
    ASSERT_EQ(gaps.size(), log.events.size());
    int rows = 0;
    for (std::size_t n = 0; n < gaps.size(); ++n) {
        EXPECT_EQ(gaps[n], log.events[n].m);
        EXPECT_EQ(log.schedule.events()[n], log.events[n].start);
        rows += gaps[n];
    }
    EXPECT_EQ(rows, static_cast<int>(log.steps.size()));
    for (std::size_t k = 0; k < log.steps.size(); ++k) EXPECT_EQ(log.steps[k].step, static_cast<int>(k));
}

}  // namespace

TEST(Algorithm, NamesRoundTrip) {
    for (Algorithm a : {Algorithm::classical, Algorithm::basic, Algorithm::update_a, Algorithm::update_b}) {
        EXPECT_EQ(parse_algorithm(to_string(a)), a);
    }
    EXPECT_FALSE(parse_algorithm("update_c").has_value());
}

TEST(UpdateScheduleTest, GapsAndValidity) {
    UpdateSchedule s;
    EXPECT_EQ(s.events(), std::vector<int>{0});
    s.append(1);
    s.append(3);
    s.append(2);
    EXPECT_EQ(s.events(), (std::vector<int>{0, 1, 4, 6}));
    EXPECT_EQ(s.gaps(), (std::vector<int>{1, 3, 2}));
    EXPECT_EQ(s.back(), 6);
    EXPECT_TRUE(s.is_valid(4));
    EXPECT_FALSE(s.is_valid(3));  // gap 3 > N - 1
    EXPECT_FALSE(UpdateSchedule({1, 2}).is_valid(5));
    EXPECT_FALSE(UpdateSchedule({0, 2, 2}).is_valid(5));
}

TEST(Run, Preconditions) {
    const ControlSystem sys = make_linear_scalar(2, 1, 1, 1);
    EXPECT_THROW(run_basic(sys, scalar(1.0), 1, 0.3), InputError);
    EXPECT_THROW(run_basic(sys, scalar(1.0), 5, 0.0), InputError);
    EXPECT_THROW(run_basic(sys, scalar(1.0), 5, 1.0), InputError);
    RunOptions o;
    o.steps = 0;
    EXPECT_THROW(run_basic(sys, scalar(1.0), 5, 0.3, o), InputError);
    EXPECT_THROW(run_basic(sys, Vector::Zero(2), 5, 0.3), InputError);
}

TEST(Run, EquilibriumStaysPut) {
    const ControlSystem sys = make_syncgen();
    RunOptions o;
    o.steps = 6;
    o.stop_tolerance = std::nullopt;
    for (Algorithm a : {Algorithm::classical, Algorithm::basic, Algorithm::update_a, Algorithm::update_b}) {
        const ExecutionLog log = run(a, sys, sys.equilibrium_state(), 8, 0.5, o);
        EXPECT_EQ(log.schedule.events(), (std::vector<int>{0, 1, 2, 3, 4, 5, 6}));
        EXPECT_EQ(log.violation_count(), 0);
        EXPECT_EQ(log.warning_count(), 0);
        for (const EventRecord& ev : log.events) {
            EXPECT_EQ(ev.certified_alpha, 1.0);
            EXPECT_TRUE(ev.certified);
        }
        EXPECT_LE(log.final_error(), 1e-10);
        EXPECT_LE(closed_loop_cost(log), 1e-12);
    }
}

TEST(Run, StopToleranceEndsEarly) {
    const ControlSystem sys = make_linear_scalar(2, 1, 1, 1);
    const ExecutionLog log = run_basic(sys, scalar(1.0), 5, 0.3);
    EXPECT_LT(static_cast<int>(log.steps.size()), 100);
    EXPECT_LE(log.final_error(), 1e-4);
    const ExecutionLog settled = run_basic(sys, scalar(0.0), 5, 0.3);
    EXPECT_TRUE(settled.events.empty());
    EXPECT_TRUE(settled.steps.empty());
}

TEST(Run, BaselineEquivalence) {
    const ControlSystem sys = make_linear_scalar(2, 1, 1, 1);
    const ExecutionLog ref = run_classical(sys, scalar(1.5), 5, 0.3);
    ASSERT_EQ(ref.violation_count(), 0);
    for (Algorithm a : {Algorithm::basic, Algorithm::update_a, Algorithm::update_b}) {
        const ExecutionLog log = run(a, sys, scalar(1.5), 5, 0.3);
        ASSERT_EQ(log.steps.size(), ref.steps.size());
        for (std::size_t k = 0; k < ref.steps.size(); ++k) {
            EXPECT_EQ(log.steps[k].control[0], ref.steps[k].control[0]) << to_string(a) << " step " << k;
            EXPECT_EQ(log.steps[k].stage_cost, ref.steps[k].stage_cost);
        }
        EXPECT_EQ(log.schedule, ref.schedule);
        EXPECT_EQ(log.splice_count(), 0);
    }
}

TEST(Run, ClosedLoopCostIsSumOfRows) {
    const ExecutionLog log = run_basic(make_linear_scalar(2, 1, 1, 1), scalar(2.0), 5, 0.3);
    double sum = 0.0;
    for (const StepRecord& r : log.steps) sum += r.stage_cost;
    EXPECT_EQ(closed_loop_cost(log), sum);
    EXPECT_EQ(log.totals.closed_loop_cost, sum);
    EXPECT_GT(log.totals.solver_calls, 0);
}

TEST(Run, LqPerformanceChain) {
    const double a = 2, b = 1, q = 1, r = 1, ab = 0.3;
    const ControlSystem sys = make_linear_scalar(a, b, q, r);
    for (int N : {3, 5, 8}) {
        for (double x0 : {-2.0, 1.0}) {
            const ExecutionLog log = run_basic(sys, scalar(x0), N, ab);
            for (const EventRecord& ev : log.events) ASSERT_TRUE(ev.certified);
            const double V_inf = oracle::riccati_P_inf(a, b, q, r) * x0 * x0;
            const double V_N = oracle::riccati_P(a, b, q, r, N) * x0 * x0;
            const double J = closed_loop_cost(log);
            const double tol = 1e-6 * V_inf;
            EXPECT_NEAR(log.initial_value, V_N, 1e-6 * V_N);
            EXPECT_LE(ab * V_inf, ab * J + tol);
            EXPECT_LE(ab * J, V_N + tol);
            EXPECT_LE(V_N, V_inf + tol);
            EXPECT_TRUE(telescoping_certificate(log).holds);
        }
    }
}

TEST(Run, WarningPathFallsBackToOneStep) {
    // alpha_local decreases with j here and never reaches 0.95
    const ExecutionLog log = run_basic(make_linear_scalar(2, 1, 1, 1), scalar(1.0), 3, 0.95);
    ASSERT_FALSE(log.events.empty());
    EXPECT_EQ(log.warning_count(), static_cast<int>(log.events.size()));
    for (const EventRecord& ev : log.events) {
        EXPECT_EQ(ev.m, 1);
        EXPECT_TRUE(ev.warning);
        EXPECT_EQ(ev.alphas.size(), 2u);
        EXPECT_NE(ev.note.find("Solution may diverge"), std::string::npos);
    }
    // classical flags the same instants without warning
    const ExecutionLog classical = run_classical(make_linear_scalar(2, 1, 1, 1), scalar(1.0), 3, 0.95);
    EXPECT_EQ(classical.warning_count(), 0);
    EXPECT_EQ(classical.violation_count(), static_cast<int>(classical.events.size()));
}

TEST(Run, DivergenceAbortsWithPartialLog) {
    const ControlSystem sys = make_linear_scalar(1e200, 1, 1, 1);
    const ExecutionLog log = run_basic(sys, scalar(1.0), 4, 0.3);
    EXPECT_TRUE(log.aborted);
    EXPECT_FALSE(log.abort_reason.empty());
}

TEST(Splicing, BasicUsesMultiStepBlock) {
    const ExecutionLog log = run_basic(fixture::double_integrator(), Vector::Ones(2), 4, 0.99, double_integrator_options());
    ASSERT_FALSE(log.events.empty());
    const EventRecord& first = log.events.front();
    EXPECT_TRUE(first.violation);
    EXPECT_EQ(first.m, 2);
    EXPECT_TRUE(first.certified);
    EXPECT_LT(first.alphas[0], 0.99);
    EXPECT_GE(first.alphas[1], 0.99);
    EXPECT_EQ(log.warning_count(), 0);
    expect_schedule_integrity(log);
    EXPECT_TRUE(telescoping_certificate(log).holds);
}

TEST(Splicing, UpdateAAndBResolveMultiStepBlocks) {
    const ControlSystem sys = fixture::double_integrator();
    const ExecutionLog basic = run_basic(sys, Vector::Ones(2), 4, 0.99, double_integrator_options());
    const ExecutionLog classical = run_classical(sys, Vector::Ones(2), 4, 0.99, double_integrator_options());
    for (Algorithm a : {Algorithm::update_a, Algorithm::update_b}) {
        const ExecutionLog log = run(a, sys, Vector::Ones(2), 4, 0.99, double_integrator_options());
        EXPECT_GT(log.splice_count(), 0) << to_string(a);
        EXPECT_EQ(log.warning_count(), 0);
        expect_schedule_integrity(log);
        EXPECT_TRUE(telescoping_certificate(log).holds);
        for (const EventRecord& ev : log.events) {
            EXPECT_TRUE(ev.certified);
            for (const UpdateAttempt& u : ev.updates) {
                EXPECT_GE(u.j, 1);
                EXPECT_LT(u.j, ev.m);
                EXPECT_EQ(u.condition, a == Algorithm::update_a ? UpdateCondition::A : UpdateCondition::B);
            }
        }
        // every multi-step block was updated at each inner instant: controls are
        // re-optimised at every sampling instant, as in the classical loop
        std::vector<int> every(log.steps.size());
        for (std::size_t k = 0; k < every.size(); ++k) every[k] = static_cast<int>(k);
        std::vector<int> instants = log.update_instants();
        instants.pop_back();
        EXPECT_EQ(instants, every);
        ASSERT_EQ(log.steps.size(), classical.steps.size());
        for (std::size_t k = 0; k < log.steps.size(); ++k) {
            EXPECT_NEAR(log.steps[k].control[0], classical.steps[k].control[0], 1e-9);
        }
        // the basic schedule's block starts are a subset of the update instants
        for (int s : basic.schedule.events()) {
            if (s < static_cast<int>(log.steps.size())) {
                EXPECT_TRUE(std::binary_search(instants.begin(), instants.end(), s));
            }
        }
    }
}

TEST(Splicing, SpliceRecordsAreConsistent) {
    const ExecutionLog log =
        run_update_A(fixture::double_integrator(), Vector::Ones(2), 4, 0.99, double_integrator_options());
    for (const EventRecord& ev : log.events) {
        for (const UpdateAttempt& u : ev.updates) {
            if (!u.applied) continue;
            EXPECT_TRUE(u.check.satisfied);
            EXPECT_EQ(ev.value_after, u.V_end_new);
        }
    }
}

TEST(SyncGen, ShortHorizonCostsStayNearLongHorizon) {
    const ControlSystem sys = make_syncgen();
    const ExecutionLog ref = run_classical(sys, fixture::syncgen_x0(), 30, 0.1);
    const double J30 = closed_loop_cost(ref);
    for (Algorithm a : {Algorithm::basic, Algorithm::update_a}) {
        const ExecutionLog log = run(a, sys, fixture::syncgen_x0(), 19, 0.1);
        EXPECT_NEAR(closed_loop_cost(log), J30, 0.25 * J30) << to_string(a);
        expect_schedule_integrity(log);
        if (log.warning_count() == 0) EXPECT_LE(log.final_error(), 1e-2);
    }
}
