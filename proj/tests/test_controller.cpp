#include "mzmbias/controller.hpp"
#include "mzmbias/errors.hpp"
#include "support/ideal_loop.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

using namespace mzmbias;
using mzmbias::testing::IdealLoop;

namespace {

constexpr double kPi = std::numbers::pi;

ControllerConfig tight_config() {
    ControllerConfig cfg;
    cfg.probe_step_dV = 0.01;
    cfg.ratio_tolerance_epsR = 0.002;
    cfg.compensation_schedule = {{0.05, 0.005}, {0.2, 0.025}, {1e300, 0.05}};
    return cfg;
}

// Phase moved by a bias change of `volts`.
double phase_of(const MzmParams& m, double volts) { return kPi * volts / m.v_pi; }


}  // namespace

TEST(Slope, Arithmetic) {
    EXPECT_DOUBLE_EQ(slope(2.0, 1.0, 0.1), 10.0);
    EXPECT_EQ(slope(0.7, 0.7, 0.02), 0.0);
    EXPECT_THROW((void)slope(1.0, 0.0, 0.0), DomainError);
}

TEST(SecondDerivative, Arithmetic) {
    EXPECT_EQ(second_derivative(1.3, 1.3, 0.02), 0.0);
    EXPECT_DOUBLE_EQ(second_derivative(1.0, 2.0, 0.5), 2.0);
    EXPECT_THROW((void)second_derivative(1.0, 2.0, 0.0), DomainError);
}

TEST(SecondDerivative, StencilIdentity) {
    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> reads(0.0, 3.0);
    std::uniform_real_distribution<double> steps(1e-3, 0.1);
    for (int i = 0; i < 2000; ++i) {
        const double g1 = reads(gen), g2 = reads(gen), g4 = reads(gen), dv = steps(gen);
        const double via_slopes = second_derivative(slope(g2, g1, dv), slope(g4, g2, dv), dv);
        const double direct = (g4 - 2.0 * g2 + g1) / (dv * dv);
        const double scale = (std::abs(g4) + 2.0 * std::abs(g2) + std::abs(g1)) / (dv * dv);
        EXPECT_NEAR(via_slopes, direct, 1e-12 * scale);
    }
}

TEST(CotangentRatio, GuardRejectsFlatSlope) {
    EXPECT_THROW((void)cotangent_ratio(1e-4, 1.0, 1e-3), DomainError);
    EXPECT_DOUBLE_EQ(cotangent_ratio(-0.5, 0.25, 1e-3), -0.5);
}

TEST(CotangentRatio, VanishesAtQuadrature) {
    const MzmParams m;
    for (double dv : {0.04, 0.02, 0.01, 0.005}) {
        auto p = [&](double v) { return mzm_transmission(m, v, 0.0); };
        const double d11 = slope(p(1.9 + dv), p(1.9), dv);
        const double d2 = second_derivative(d11, slope(p(1.9 + 2 * dv), p(1.9 + dv), dv), dv);
        // the centred second difference sits dV above quadrature
        EXPECT_LE(std::abs(cotangent_ratio(d11, d2, 1e-6)), 2.0 * (kPi / m.v_pi) * (kPi / m.v_pi) * dv);
    }
}

TEST(CotangentRatio, ConvergesToAnalyticValueAtQuarterPhase) {
    // theta = pi/4 at V = 0.95 V; with theta = pi V / Vpi + phase the ratio
    // d2/d1 tends to +(pi / Vpi) cot(theta).
    const MzmParams m;
    const double analytic = (kPi / 3.8) / std::tan(kPi / 4.0);
    EXPECT_NEAR(analytic, 0.8267, 5e-5);
    double prev_error = std::numeric_limits<double>::infinity();
    for (double dv : {0.08, 0.04, 0.02, 0.01, 0.005}) {
        auto p = [&](double v) { return mzm_transmission(m, v, 0.0); };
        const double d11 = slope(p(0.95 + dv), p(0.95), dv);
        const double d2 = second_derivative(d11, slope(p(0.95 + 2 * dv), p(0.95 + dv), dv), dv);
        const double error = std::abs(cotangent_ratio(d11, d2, 1e-6) - analytic);
        EXPECT_LT(error, prev_error);
        prev_error = error;
    }
    EXPECT_LT(prev_error, 0.01);
}

TEST(ClassifyDrift, RuleExamples) {
    EXPECT_EQ(classify_drift(0.10, 0.25, 0.01), DriftDirection::Left);
    EXPECT_EQ(classify_drift(0.25, 0.10, 0.01), DriftDirection::Right);
    EXPECT_EQ(classify_drift(0.3, 0.3, 0.01), DriftDirection::None);
    EXPECT_EQ(classify_drift(0.3, 0.305, 0.01), DriftDirection::None);
}

TEST(CompensationVoltage, BucketLookup) {
    ControllerConfig cfg;
    cfg.compensation_schedule = {{0.05, 0.01}, {0.5, 0.05}};
    EXPECT_DOUBLE_EQ(compensation_voltage(cfg, 0.0, DriftDirection::Left), 0.01);
    EXPECT_DOUBLE_EQ(compensation_voltage(cfg, 0.0, DriftDirection::Right), -0.01);
    EXPECT_DOUBLE_EQ(compensation_voltage(cfg, 0.3, DriftDirection::Left), 0.05);
    EXPECT_DOUBLE_EQ(compensation_voltage(cfg, 0.3, DriftDirection::Right), -0.05);
    EXPECT_DOUBLE_EQ(compensation_voltage(cfg, 7.0, DriftDirection::Left), 0.05);
    EXPECT_EQ(compensation_voltage(cfg, 0.3, DriftDirection::None), 0.0);
    cfg.compensation_schedule.clear();
    EXPECT_THROW((void)compensation_voltage(cfg, 0.1, DriftDirection::Left), ConfigError);
}

TEST(CompensationVoltage, MonotoneInMagnitude) {
    const ControllerConfig cfg;
    double prev = 0.0;
    for (double mag = 0.0; mag < 2.0; mag += 0.001) {
        const double step = compensation_voltage(cfg, mag, DriftDirection::Left);
        EXPECT_GE(step, prev);
        prev = step;
    }
}

TEST(ControllerValidation, NamesField) {
    ControllerConfig cfg;
    cfg.compensation_schedule = {{0.2, 0.01}, {0.1, 0.02}};
    try {
        validate(cfg);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "compensation_schedule[1]");
    }
    cfg = ControllerConfig{};
    cfg.probe_step_dV = 0.0;
    EXPECT_THROW(validate(cfg), ConfigError);
    cfg = ControllerConfig{};
    cfg.max_iterations = 0;
    EXPECT_THROW(validate(cfg), ConfigError);
}

TEST(ControllerStep, FreshStateSetsBaseThenReads) {
    const ControllerConfig cfg;
    auto [s1, a1] = controller_step(initial_state(cfg, 1.9), cfg, std::nullopt);
    EXPECT_EQ(a1, ControlAction{action::SetBias{1.9}});
    EXPECT_EQ(s1.fsm_position, FsmPosition::RefReadVg1);
    auto [s2, a2] = controller_step(s1, cfg, std::nullopt);
    EXPECT_EQ(a2, ControlAction{action::ReadMonitor{}});
    EXPECT_TRUE(s2.awaiting_read);
}

TEST(ControllerStep, ReferenceCycleProbesUpward) {
    IdealLoop loop(MzmParams{}, ControllerConfig{}, 1.9);
    std::vector<double> biases;
    for (int i = 0; i < 6; ++i) {
        const auto a = loop.step();
        if (const auto* s = std::get_if<action::SetBias>(&a)) biases.push_back(s->volts);
    }
    ASSERT_EQ(biases.size(), 3u);
    EXPECT_DOUBLE_EQ(biases[0], 1.9);
    EXPECT_DOUBLE_EQ(biases[1], 1.92);
    EXPECT_DOUBLE_EQ(biases[2], 1.94);
    loop.run_reference();
    ASSERT_TRUE(loop.state.r1 && loop.state.vg1 && loop.state.vg2 && loop.state.vg4);
    const double dv = loop.cfg.probe_step_dV;
    const double direct = (*loop.state.vg4 - 2.0 * *loop.state.vg2 + *loop.state.vg1) / (dv * dv);
    EXPECT_NEAR(*loop.state.d2, direct, 1e-9 * std::abs(*loop.state.vg1) / (dv * dv));
}

TEST(ControllerStep, ProtocolViolationsFault) {
    const ControllerConfig cfg;
    auto [s, a] = controller_step(initial_state(cfg, 1.9), cfg, 0.5);
    EXPECT_TRUE(std::holds_alternative<action::Fault>(a));
    EXPECT_EQ(s.fsm_position, FsmPosition::Faulted);
    // stays faulted
    auto [s2, a2] = controller_step(s, cfg, std::nullopt);
    EXPECT_TRUE(std::holds_alternative<action::Fault>(a2));
    EXPECT_EQ(s2.fsm_position, FsmPosition::Faulted);

    auto [r1, b1] = controller_step(initial_state(cfg, 1.9), cfg, std::nullopt);
    auto [r2, b2] = controller_step(r1, cfg, std::nullopt);
    ASSERT_TRUE(r2.awaiting_read);
    auto [r3, b3] = controller_step(r2, cfg, std::nullopt);
    EXPECT_TRUE(std::holds_alternative<action::Fault>(b3));

    auto [n1, c1] = controller_step(r2, cfg, std::numeric_limits<double>::quiet_NaN());
    EXPECT_TRUE(std::holds_alternative<action::Fault>(c1));
}

TEST(ControllerStep, TotalUnderRandomInputs) {
    // Random protocol fuzzing: every call returns exactly one action and the
    // controller never throws, whether or not inputs follow the protocol.
    std::mt19937_64 gen(77);
    std::uniform_real_distribution<double> u(-1.0, 3.0);
    std::bernoulli_distribution obey(0.97);
    for (int mode = 0; mode < 2; ++mode) {
        ControllerConfig cfg;
        cfg.mode = mode == 0 ? ControlMode::CotangentTracking : ControlMode::ExtremumNulling;
        for (int run = 0; run < 200; ++run) {
            ControllerState st = initial_state(cfg, 1.9);
            std::optional<double> pending;
            for (int i = 0; i < 200; ++i) {
                std::optional<double> input = pending;
                if (!obey(gen)) input = input ? std::nullopt : std::optional<double>(u(gen));
                std::pair<ControllerState, ControlAction> out;
                ASSERT_NO_THROW(out = controller_step(st, cfg, input));
                st = out.first;
                pending.reset();
                if (std::holds_alternative<action::ReadMonitor>(out.second)) pending = u(gen);
                if (st.fsm_position == FsmPosition::Faulted) {
                    EXPECT_TRUE(std::holds_alternative<action::Fault>(out.second));
                    break;
                }
                EXPECT_LE(st.iteration_count, cfg.max_iterations);
            }
        }
    }
}

TEST(ControllerStep, SettleReadsAreDiscarded) {
    ControllerConfig cfg;
    cfg.settle_reads = 2;
    IdealLoop loop(MzmParams{}, cfg, 1.9);
    int reads_before_second_bias = 0;
    int set_bias_seen = 0;
    for (int i = 0; i < 20 && set_bias_seen < 2; ++i) {
        const auto a = loop.step();
        if (std::holds_alternative<action::SetBias>(a)) ++set_bias_seen;
        if (std::holds_alternative<action::ReadMonitor>(a)) ++reads_before_second_bias;
    }
    EXPECT_EQ(reads_before_second_bias, 3);
}

TEST(ControllerStep, DirectionReducesInjectedError) {
    const MzmParams m;
    for (double base : {1.5, 1.9, 2.3}) {
        for (double delta = -1.0; delta <= 1.0; delta += 0.05) {
            if (std::abs(delta) < 0.02) continue;
            IdealLoop loop(m, tight_config(), base);
            loop.run_reference();
            loop.drift = delta;
            const auto a = loop.run_to_decision();
            const auto* comp = std::get_if<action::ApplyCompensation>(&a);
            ASSERT_NE(comp, nullptr) << "base " << base << " delta " << delta;
            EXPECT_LT(std::abs(delta + phase_of(m, comp->delta)), std::abs(delta))
                << "base " << base << " delta " << delta;
        }
    }
}

TEST(ControllerStep, InjectedStepIsTrackedMonotonically) {
    const MzmParams m;
    IdealLoop loop(m, tight_config(), 1.9);
    loop.run_reference();
    loop.drift = 0.1;
    double prev = std::abs(loop.base_phase_error(1.9));
    for (int cycle = 0; cycle < 200; ++cycle) {
        const auto a = loop.run_to_decision();
        const double err = std::abs(loop.base_phase_error(1.9));
        if (std::holds_alternative<action::Done>(a)) break;
        ASSERT_TRUE(std::holds_alternative<action::ApplyCompensation>(a));
        EXPECT_LT(err, prev);
        prev = err;
    }
    EXPECT_LE(std::abs(loop.base_phase_error(1.9)), loop.cfg.ratio_tolerance_epsR / (kPi / m.v_pi) + 1e-3);
}

TEST(ControllerStep, ConvergesUnderConstantDrift) {
    const MzmParams m;
    for (double delta : {-0.9, -0.3, -0.05, 0.05, 0.3, 0.9}) {
        IdealLoop loop(m, tight_config(), 1.9);
        loop.run_reference();
        loop.drift = delta;
        bool done = false;
        for (int i = 0; i < loop.cfg.max_iterations + 10 && !done; ++i) {
            done = std::holds_alternative<action::Done>(loop.run_to_decision());
        }
        ASSERT_TRUE(done) << delta;
        EXPECT_LE(std::abs(loop.base_phase_error(1.9)), phase_of(m, 0.005)) << delta;
    }
}

TEST(ControllerStep, NoCompensationWithoutDrift) {
    IdealLoop loop(MzmParams{}, ControllerConfig{}, 1.9);
    loop.run_reference();
    const auto a = loop.run_to_decision();
    EXPECT_TRUE(std::holds_alternative<action::Done>(a));
    EXPECT_DOUBLE_EQ(loop.state.base_bias, 1.9);
}

TEST(ControllerStep, DecisionsInvariantToPowerScale) {
    auto trace = [](double alpha) {
        MzmParams m;
        m.input_power *= alpha;
        ControllerConfig cfg = tight_config();
        IdealLoop loop(m, cfg, 1.9);
        std::vector<ControlAction> actions;
        for (int i = 0; i < 4000; ++i) {
            loop.drift = 0.4 * std::sin(i / 500.0) + (i > 1500 ? 0.3 : 0.0);
            actions.push_back(loop.step());
        }
        return actions;
    };
    const auto reference = trace(1.0);
    for (double alpha : {0.5, 2.0, 10.0, 0.1}) {
        EXPECT_EQ(trace(alpha), reference) << alpha;
    }
}

TEST(ControllerStep, SingularSlopeFaultsAfterRetries) {
    // Cotangent tracking parked on a transmission minimum never sees a usable slope.
    ControllerConfig cfg;
    cfg.min_slope_guard = 0.5;
    IdealLoop loop(MzmParams{}, cfg, 3.8);
    ControlAction a;
    for (int i = 0; i < 1000; ++i) {
        a = loop.step();
        if (std::holds_alternative<action::Fault>(a)) break;
    }
    EXPECT_TRUE(std::holds_alternative<action::Fault>(a));
    EXPECT_GT(loop.state.guard_trips, 0);
}

TEST(ControllerStep, IterationBudgetFaults) {
    ControllerConfig cfg = tight_config();
    cfg.compensation_schedule = {{1e300, 0.0}};
    cfg.max_iterations = 5;
    IdealLoop loop(MzmParams{}, cfg, 1.9);
    loop.run_reference();
    loop.drift = 0.5;
    int compensations = 0;
    ControlAction a;
    for (int i = 0; i < 20; ++i) {
        a = loop.run_to_decision();
        if (std::holds_alternative<action::Fault>(a)) break;
        ++compensations;
    }
    EXPECT_TRUE(std::holds_alternative<action::Fault>(a));
    EXPECT_EQ(compensations, 5);
}

TEST(ExtremumNulling, FixedPointAtMinimum) {
    ControllerConfig cfg;
    cfg.mode = ControlMode::ExtremumNulling;
    IdealLoop loop(MzmParams{}, cfg, 3.8);
    for (int i = 0; i < 500; ++i) {
        const auto a = loop.step();
        ASSERT_FALSE(std::holds_alternative<action::ApplyCompensation>(a));
    }
    EXPECT_DOUBLE_EQ(loop.state.base_bias, 3.8);
    EXPECT_GT(loop.state.cycles_completed, 10);
}

TEST(ExtremumNulling, WalksTowardExtremum) {
    for (auto kind : {ExtremumKind::Minimum, ExtremumKind::Maximum}) {
        ControllerConfig cfg;
        cfg.mode = ControlMode::ExtremumNulling;
        cfg.extremum = kind;
        cfg.probe_step_dV = 0.01;
        cfg.slope_tolerance_epsD = 0.001;
        cfg.compensation_schedule = {{0.01, 0.002}, {0.05, 0.01}, {1e300, 0.05}};
        const double target = kind == ExtremumKind::Minimum ? 3.8 : 7.6;
        for (double offset : {-0.8, -0.2, 0.2, 0.8}) {
            IdealLoop loop(MzmParams{}, cfg, target + offset);
            bool done = false;
            for (int i = 0; i < 300 && !done; ++i) done = std::holds_alternative<action::Done>(loop.run_to_decision());
            ASSERT_TRUE(done);
            EXPECT_LT(std::abs(loop.state.base_bias - target), 0.05) << offset;
        }
    }
}
