#include <cmath>

#include <gtest/gtest.h>

#include "anytime/controller.hpp"
#include "anytime/errors.hpp"
#include "oracles.hpp"

namespace anytime {
namespace {

Vector v1(double a) { return Vector::Constant(1, a); }

BufferState buffer_of(std::initializer_list<double> values, int lambda) {
    BufferState b(static_cast<int>(values.size()), 1);
    int i = 0;
    for (double v : values) b.slots[static_cast<std::size_t>(i++)] = v1(v);
    b.effective_length = lambda;
    return b;
}

TEST(TentativeSequence, CubicFromOne) {
    const auto plant = make_builtin_plant("cubic_scalar");
    const auto seq = tentative_sequence(plant, v1(1.0), 3);
    ASSERT_EQ(seq.controls.size(), 3u);
    EXPECT_NEAR(seq.controls[0](0), -2.0, 1e-15);
    EXPECT_NEAR(seq.controls[1](0), -(0.99 * 0.99 * 0.99) - 0.99, 1e-15);
    EXPECT_NEAR(seq.controls[1](0), -1.960299, 1e-12);
    EXPECT_NEAR(seq.controls[2](0), -std::pow(0.9801, 3) - 0.9801, 1e-15);
    EXPECT_NEAR(seq.predicted_states[0](0), 0.99, 1e-15);
    EXPECT_NEAR(seq.predicted_states[1](0), 0.9801, 1e-15);
    EXPECT_NEAR(seq.predicted_states[2](0), 0.970299, 1e-15);
}

TEST(TentativeSequence, OriginStaysAtRest) {
    const auto plant = make_builtin_plant("sat_2d");
    const auto seq = tentative_sequence(plant, Vector::Zero(2), 2);
    for (const auto& u : seq.controls) EXPECT_TRUE(u.isZero(0.0));
}

TEST(TentativeSequence, LogPlantHalvesEachStep) {
    const auto plant = make_builtin_plant("log_lyapunov", {{"rho", 0.5}});
    const auto seq = tentative_sequence(plant, v1(1.0), 4);
    double v = plant.lyapunov(v1(1.0));
    for (const auto& chi : seq.predicted_states) {
        EXPECT_NEAR(plant.lyapunov(chi), 0.5 * v, 1e-12);
        v = plant.lyapunov(chi);
    }
}

TEST(TentativeSequence, InconsistentCertificateNamesTheStep) {
    auto plant = make_builtin_plant("cubic_scalar");
    plant.rho = 0.5;
    try {
        tentative_sequence(plant, v1(1.0), 3);
        FAIL();
    } catch (const CertificateViolation& e) {
        EXPECT_EQ(e.step(), 1);
    }
}

TEST(TentativeSequence, SlackScalesWithLargeStates) {
    // x^3 + kappa(x) cancels at |x| ~ 1e3; the absolute part alone is too tight there.
    const auto plant = make_builtin_plant("cubic_scalar");
    EXPECT_NO_THROW(tentative_sequence(plant, v1(1153.0), 4));
    EXPECT_NO_THROW(tentative_sequence(plant, v1(-2.5e3), 4));
}

TEST(TentativeSequence, RejectsEmptyRequest) {
    const auto plant = make_builtin_plant("cubic_scalar");
    EXPECT_THROW(tentative_sequence(plant, v1(1.0), 0), PreconditionError);
}

TEST(Shift, MovesSlotsUp) {
    const auto b = shift(buffer_of({1, 2, 3}, 3));
    EXPECT_EQ(b, buffer_of({2, 3, 0}, 2));
}

TEST(Shift, EmptyBufferIsFixed) {
    const auto b = shift(buffer_of({0, 0, 0}, 0));
    EXPECT_EQ(b, buffer_of({0, 0, 0}, 0));
}

TEST(ControllerStep, BaselineUsesIndicatorOnly) {
    const auto plant = make_builtin_plant("cubic_scalar");
    BufferState buf(3, 1);
    EXPECT_DOUBLE_EQ(apply_step(ControllerKind::baseline, plant, v1(1.0), 3, buf)(0), -2.0);
    EXPECT_EQ(buf.effective_length, 1);
    EXPECT_DOUBLE_EQ(apply_step(ControllerKind::baseline, plant, v1(1.0), 0, buf)(0), 0.0);
    EXPECT_EQ(buf.effective_length, 0);
}

TEST(ControllerStep, RejectsLengthBeyondCapacity) {
    const auto plant = make_builtin_plant("cubic_scalar");
    BufferState buf(2, 1);
    EXPECT_THROW(apply_step(ControllerKind::a1, plant, v1(1.0), 3, buf), PreconditionError);
}

TEST(ControllerStep, ValueFormMatchesInPlaceForm) {
    const auto plant = make_builtin_plant("cubic_scalar");
    BufferState buf(4, 1);
    apply_step(ControllerKind::a2, plant, v1(0.8), 4, buf);
    const auto result = controller_step(ControllerKind::a2, plant, v1(0.7), 1, buf);
    BufferState copy = buf;
    const Vector u = apply_step(ControllerKind::a2, plant, v1(0.7), 1, copy);
    EXPECT_EQ(result.buffer, copy);
    EXPECT_EQ(result.input, u);
}

TEST(ControllerStep, AllKindsCoincideWhenAlwaysAvailable) {
    const auto plant = make_builtin_plant("cubic_scalar");
    for (int n : {1, 2, 3}) {
        Vector xb = v1(1.3), x1 = xb, x2 = xb;
        BufferState bb(3, 1), b1(3, 1), b2(3, 1);
        for (int k = 0; k < 50; ++k) {
            const Vector ub = apply_step(ControllerKind::baseline, plant, xb, n, bb);
            const Vector ua1 = apply_step(ControllerKind::a1, plant, x1, n, b1);
            const Vector ua2 = apply_step(ControllerKind::a2, plant, x2, n, b2);
            ASSERT_EQ(ub, ua1);
            ASSERT_EQ(ub, ua2);
            const double before = plant.lyapunov(xb);
            xb = x1 = x2 = nominal_step(plant, xb, ub);
            ASSERT_LE(plant.lyapunov(xb), plant.rho * before + 1e-9);
        }
    }
}

TEST(ControllerStep, LambdaRecursionsAndMatrixFormForLambdaFive) {
    const auto plant = make_builtin_plant("linear_scalar", {{"a", 1.1}});
    constexpr int kCap = 5;
    testing::for_each_sequence(6, kCap, [&](const std::vector<int>& seq) {
        BufferState b1(kCap, 1), b2(kCap, 1);
        int l1 = 0, l2 = 0;
        double x = 1.0;
        for (int n : seq) {
            x += 0.25;
            const Eigen::MatrixXd before = testing::stack(b2);
            apply_step(ControllerKind::a1, plant, v1(x), n, b1);
            apply_step(ControllerKind::a2, plant, v1(x), n, b2);
            l1 = testing::lambda_a1(l1, n);
            l2 = testing::lambda_a2(l2, n);
            ASSERT_EQ(b1.effective_length, l1);
            ASSERT_EQ(b2.effective_length, l2);
            ASSERT_GE(b2.effective_length, b1.effective_length);
            ASSERT_TRUE(b1.tail_is_zero());
            ASSERT_TRUE(b2.tail_is_zero());
            if (n >= 1) {
                const auto ubar = tentative_sequence(plant, v1(x), n).controls;
                ASSERT_EQ(testing::stack(b2), testing::a2_matrix_update(before, ubar));
            } else {
                ASSERT_EQ(testing::stack(b2), testing::shift_matrix(kCap) * before);
            }
        }
    });
}

TEST(ControllerStep, A1AndA2AgreeForSmallBuffers) {
    const auto plant = make_builtin_plant("cubic_scalar");
    for (int cap : {1, 2}) {
        testing::for_each_sequence(6, cap, [&](const std::vector<int>& seq) {
            BufferState b1(cap, 1), b2(cap, 1);
            double x = 0.9;
            for (int n : seq) {
                x *= 0.97;
                const Vector u1 = apply_step(ControllerKind::a1, plant, v1(x), n, b1);
                const Vector u2 = apply_step(ControllerKind::a2, plant, v1(x), n, b2);
                ASSERT_EQ(u1, u2);
                ASSERT_EQ(b1, b2);
            }
        });
    }
}

TEST(ControllerStep, IdleStepAppliesFirstSlotAfterShift) {
    const auto plant = make_builtin_plant("cubic_scalar");
    for (auto kind : {ControllerKind::a1, ControllerKind::a2}) {
        BufferState buf = buffer_of({1, 2, 3, 4}, 4);
        const Vector u = apply_step(kind, plant, v1(0.5), 0, buf);
        EXPECT_EQ(u(0), 2.0);
        EXPECT_EQ(u, buf.slots.front());
    }
}

TEST(Playback, ZeroStepsIsIdentity) {
    const auto plant = make_builtin_plant("cubic_scalar");
    EXPECT_EQ(predict_buffer_playback(plant, v1(0.4), buffer_of({1, 2}, 2), 0), v1(0.4));
}

TEST(Playback, EmptyBufferIsOpenLoop) {
    const auto plant = make_builtin_plant("cubic_scalar");
    const Vector zero = v1(0.0);
    const Vector expected = nominal_step(plant, nominal_step(plant, v1(1.0), zero), zero);
    EXPECT_EQ(predict_buffer_playback(plant, v1(1.0), BufferState(3, 1), 2), expected);
}

TEST(Playback, MatchesIdleA2Trajectory) {
    const auto plant = make_builtin_plant("cubic_scalar");
    BufferState buf(5, 1);
    Vector x = v1(1.0);
    // Fill the buffer, then run idle; the trajectory from k = 1 must equal the
    // playback of the buffer that is read from k = 1 on.
    const Vector u0 = apply_step(ControllerKind::a2, plant, x, 5, buf);
    x = nominal_step(plant, x, u0);
    const BufferState remaining = shift(buf);
    const Vector x1 = x;
    for (int j = 1; j <= 7; ++j) {
        const Vector u = apply_step(ControllerKind::a2, plant, x, 0, buf);
        x = nominal_step(plant, x, u);
        ASSERT_EQ(x, predict_buffer_playback(plant, x1, remaining, j)) << j;
    }
}

TEST(Controller, CapTruncatesSequenceLength) {
    const auto plant = make_builtin_plant("cubic_scalar");
    Controller c({ControllerKind::a2, 2}, plant, 4);
    EXPECT_EQ(c.capacity(), 2);
    c.step(v1(1.0), 4);
    EXPECT_EQ(c.buffer().effective_length, 2);
}

TEST(Controller, CapOfOneIsBaseline) {
    const auto plant = make_builtin_plant("cubic_scalar");
    Controller a2({ControllerKind::a2, 1}, plant, 4);
    Controller base({ControllerKind::baseline, std::nullopt}, plant, 4);
    testing::for_each_sequence(5, 4, [&](const std::vector<int>& seq) {
        a2.reset();
        base.reset();
        double x = 0.8;
        for (int n : seq) {
            x *= 0.9;
            ASSERT_EQ(a2.step(v1(x), n), base.step(v1(x), n));
        }
    });
}

TEST(Controller, RejectsZeroCap) {
    const auto plant = make_builtin_plant("cubic_scalar");
    EXPECT_THROW(Controller({ControllerKind::a1, 0}, plant, 3), ConfigError);
}

TEST(ControllerKindText, RoundTrip) {
    for (auto k : {ControllerKind::baseline, ControllerKind::a1, ControllerKind::a2})
        EXPECT_EQ(parse_controller_kind(to_string(k)), k);
    EXPECT_EQ(parse_controller_kind("A2"), ControllerKind::a2);
    EXPECT_THROW(parse_controller_kind("mpc"), ConfigError);
}

}  // namespace
}  // namespace anytime
