#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "anytime/plant.hpp"
#include "anytime/types.hpp"

namespace anytime {

enum class ControllerKind { baseline, a1, a2 };

std::string_view to_string(ControllerKind kind);

/// Accepts "baseline", "a1", "a2" (case-insensitive). Throws ConfigError with
/// key `controller.kind`.
ControllerKind parse_controller_kind(std::string_view text);

struct ControllerSpec {
    ControllerKind kind = ControllerKind::baseline;
    // Artificial buffer size limit; N is truncated to min(N, cap).
    std::optional<int> buffer_cap;
};

/// Buffer of tentative inputs b = (b_1, ..., b_Lambda) with effective length
/// lambda. Slots at index >= effective_length are zero.
struct BufferState {
    std::vector<Vector> slots;
    int effective_length = 0;

    BufferState() = default;
    BufferState(int capacity, int input_dim);

    int capacity() const { return static_cast<int>(slots.size()); }

    /// b <- S b, lambda <- max(lambda - 1, 0).
    void shift();

    /// Zeroes every slot and sets lambda = 0.
    void clear();

    /// True when every slot at index >= effective_length is exactly zero.
    bool tail_is_zero() const;

    friend bool operator==(const BufferState& a, const BufferState& b);
};

/// Copying form of BufferState::shift.
BufferState shift(BufferState buf);

struct TentativeSequence {
    std::vector<Vector> controls;          // u_1 .. u_N
    std::vector<Vector> predicted_states;  // chi_2 .. chi_{N+1}
};

/**
 * chi_1 = x; u_j = kappa(chi_j); chi_{j+1} = f(chi_j, u_j, 0) for j = 1..N.
 * Every step must satisfy V(chi_{j+1}) <= rho V(chi_j) + slack max(1, rho V(chi_j)),
 * otherwise CertificateViolation(j) is thrown. The slack is absolute below
 * V = 1 and relative above, so it never falls under double resolution.
 * Throws PreconditionError when N < 1.
 */
TentativeSequence tentative_sequence(const PlantModel& plant, const Vector& x, int n,
                                     double slack = 1e-9);

/// Updates `buf` in place for one time step and returns the applied input.
///
///   baseline  u = kappa(x) if N >= 1, else 0. The buffer mirrors a capacity-1
///             store: slot 1 holds u and lambda = min(N, 1); other slots stay
///             zero.
///   a1        N = 0: shift, read slot 1. N >= 1: buffer = (u_1..u_N, 0..0),
///             lambda = N.
///   a2        N = 0: as a1. N >= 1: shift, then overwrite slots 1..N with
///             u_1..u_N; lambda = max(N, lambda - 1).
///
/// Requires 0 <= N <= buf.capacity() for a1/a2 (PreconditionError otherwise).
Vector apply_step(ControllerKind kind, const PlantModel& plant, const Vector& x, int n,
                  BufferState& buf, double slack = 1e-9);

struct StepResult {
    Vector input;
    BufferState buffer;
};

/// Value-semantics wrapper around apply_step.
StepResult controller_step(ControllerKind kind, const PlantModel& plant, const Vector& x, int n,
                           const BufferState& buf, double slack = 1e-9);

/// Nominal state after j steps when step s applies slot s while s < lambda and
/// zero afterwards. j = 0 returns x.
Vector predict_buffer_playback(const PlantModel& plant, const Vector& x, const BufferState& buf,
                               int j);

/// Per-run controller: owns the buffer and applies the buffer-cap truncation.
/// The plant must outlive the controller.
class Controller {
public:
    Controller(const ControllerSpec& spec, const PlantModel& plant, int max_length,
               double slack = 1e-9);

    /// Applies min(n, capacity) and returns u(k).
    Vector step(const Vector& x, int n);

    void reset() { buffer_.clear(); }

    ControllerKind kind() const { return kind_; }
    int capacity() const { return buffer_.capacity(); }
    const BufferState& buffer() const { return buffer_; }

private:
    ControllerKind kind_;
    const PlantModel* plant_;
    double slack_;
    BufferState buffer_;
};

}  // namespace anytime
