#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "anytime/rng.hpp"
#include "anytime/types.hpp"

namespace anytime {

/// Axis-aligned box used to sample states for invariant checks and random
/// initial conditions.
struct SamplingBox {
    Vector lo;
    Vector hi;

    static SamplingBox cube(int dim, double lo, double hi) {
        return {Vector::Constant(dim, lo), Vector::Constant(dim, hi)};
    }
    Vector sample(Rng& rng) const;
};

/**
 * Discrete-time plant x(k+1) = f(x(k), u(k), w(k)) together with the control
 * Lyapunov data that the anytime controllers and the certificates consume:
 *
 *   lower_bound(|x|) <= V(x) <= upper_bound(|x|)
 *   V(f(x, policy(x), 0)) <= rho V(x)
 *   V(f(x, 0, 0))         <= alpha V(x)
 *
 * Instances are immutable after construction and may be shared across
 * simulation threads.
 */
struct PlantModel {
    using Dynamics = std::function<Vector(const Vector& x, const Vector& u, const Vector& w)>;
    using Lyapunov = std::function<double(const Vector& x)>;
    using Policy = std::function<Vector(const Vector& x)>;
    using ClassKInf = std::function<double(double)>;

    std::string name;
    int state_dim = 1;
    int input_dim = 1;
    int disturbance_dim = 0;

    Dynamics dynamics;
    Lyapunov lyapunov;
    Policy policy;

    double rho = 0.0;
    // Open-loop growth bound. Unset when the plant has no global bound and the
    // user has not declared one for the sampling box.
    std::optional<double> alpha;

    ClassKInf lower_bound;
    ClassKInf upper_bound;

    // Per-component |u_i| limits; +inf when unconstrained.
    Vector input_limit;

    // Region on which the Lyapunov inequalities are asserted.
    SamplingBox box;
};

/// Checks dimensions, callable presence and 0 <= rho < 1, alpha >= 1.
/// Throws ConfigError.
void validate(const PlantModel& plant);

/// f(x, u, w). Throws DimensionError on mismatched vectors.
Vector step(const PlantModel& plant, const Vector& x, const Vector& u, const Vector& w);

/// f(x, u, 0) without dimension checks; the hot path of the controllers.
inline Vector nominal_step(const PlantModel& plant, const Vector& x, const Vector& u) {
    return plant.dynamics(x, u, Vector::Zero(plant.disturbance_dim));
}

using PlantParams = std::map<std::string, double, std::less<>>;

/**
 * Builds one of the reference plants:
 *
 *   cubic_scalar       x + 0.01 (x^3 + u) + w, kappa(x) = -x^3 - x, V = |x|,
 *                      rho = 0.99. `alpha` is optional and only meaningful on
 *                      the sampling box (param `box`, default 10).
 *   linear_scalar      a x + u + w with the infinite-horizon LQR gain for stage
 *                      cost 0.2 x^2 + 2 u^2; V = |x|, rho = |a - K|,
 *                      alpha = max(1, |a|). Param `a` (default 1.5).
 *   sat_2d             saturated two-input plant, V = 2|x|, rho = 1/2,
 *                      alpha = 1.618, |u_2| <= 0.8.
 *   log_lyapunov       x^2 + u, V = ln(|x| + 1),
 *                      kappa = -x^2 + exp(rho V(x)) - 1, alpha = 2.
 *                      Param `rho` (default 0.5).
 *
 * Params `q` and `r` override the LQR weights of linear_scalar. Throws
 * ConfigError for unknown names or out-of-range parameters.
 */
PlantModel make_builtin_plant(std::string_view name, const PlantParams& params = {});

/// Infinite-horizon discrete LQR gain for x+ = a x + b u with stage cost
/// q x^2 + r u^2, from the scalar Riccati recursion iterated to `tolerance`.
double scalar_lqr_gain(double a, double b, double q, double r, double tolerance = 1e-12);

/// Outcome of sampling the three Lyapunov inequalities on the plant's box.
struct LyapunovCheck {
    int samples = 0;
    int violations = 0;
    // Largest observed excess lhs - rhs over all inequalities (<= slack when ok).
    double worst_excess = -std::numeric_limits<double>::infinity();
    std::string first_violation;

    bool ok() const { return violations == 0; }
};

/// Samples `samples` states uniformly from `plant.box` and tests the sandwich
/// bounds, the closed-loop contraction and (when alpha is set) the open-loop
/// growth bound with absolute slack `slack`.
LyapunovCheck check_lyapunov_conditions(const PlantModel& plant, int samples, std::uint64_t seed,
                                        double slack = 1e-9);

/// Disturbance law for w(k).
struct DisturbanceModel {
    enum class Kind { none, uniform, gaussian };

    Kind kind = Kind::none;
    double lo = 0.0;
    double hi = 0.0;
    double mean = 0.0;
    double variance = 0.0;
    int dim = 0;

    static DisturbanceModel none(int dim) { return {Kind::none, 0, 0, 0, 0, dim}; }
    static DisturbanceModel uniform(int dim, double lo, double hi) {
        return {Kind::uniform, lo, hi, 0, 0, dim};
    }
    static DisturbanceModel gaussian(int dim, double mean, double variance) {
        return {Kind::gaussian, 0, 0, mean, variance, dim};
    }
};

/// lo <= hi, variance >= 0, non-negative dimension. Throws ConfigError.
void validate(const DisturbanceModel& model);

/// Draws one disturbance vector. `none` returns zeros and consumes no
/// randomness.
Vector draw(const DisturbanceModel& model, Rng& rng);

std::string_view to_string(DisturbanceModel::Kind kind);

}  // namespace anytime
