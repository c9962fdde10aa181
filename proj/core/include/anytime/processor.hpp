#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "anytime/rng.hpp"

namespace anytime {

/// i.i.d. sequence-length law: Pr{N(k) = l} = pmf[l], l = 0..max_length().
struct IidAvailability {
    std::vector<double> pmf;

    int max_length() const { return static_cast<int>(pmf.size()) - 1; }
    double p0() const { return pmf.empty() ? 1.0 : pmf.front(); }
};

/**
 * Markov-modulated availability. The processor state g(k) in {0..G-1} is a
 * Markov chain with row-stochastic `transition`; given g(k) = s, N(k) is drawn
 * from row s of `conditional` (G x (max_length + 1)).
 *
 * `initial_state` is 0-based; when unset the sampler draws g(0) from the
 * stationary distribution of the chain.
 */
struct MarkovAvailability {
    Eigen::MatrixXd transition;
    Eigen::MatrixXd conditional;
    std::optional<int> initial_state;

    int states() const { return static_cast<int>(transition.rows()); }
    int max_length() const { return static_cast<int>(conditional.cols()) - 1; }
    double p0(int state) const { return conditional(state, 0); }
};

using Availability = std::variant<IidAvailability, MarkovAvailability>;

int max_length(const Availability& model);

/// Uniform execution-time model: Lambda = floor(1/tau) (with a 1e-9 snap
/// before flooring), p_l = tau for l < Lambda and p_Lambda = 1 - Lambda tau.
/// Throws ConfigError (key `availability.tau`) unless 0 < tau < 1.
IidAvailability from_execution_time(double tau);

/// Every violated invariant, one message each; an empty result means valid.
std::vector<std::string> validate(const IidAvailability& model);
std::vector<std::string> validate(const MarkovAvailability& model);
std::vector<std::string> validate(const Availability& model);

/// Irreducible: every state reaches every other state.
bool is_irreducible(const Eigen::MatrixXd& transition);

/// Primitive: Q^k is entrywise positive for some k <= G^2 (irreducible and
/// aperiodic for a stochastic matrix).
bool is_primitive(const Eigen::MatrixXd& transition);

/// Stationary row vector pi = pi Q by power iteration, stopped when the
/// l1 change drops below `tolerance`.
Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& transition,
                                        double tolerance = 1e-12, int max_iterations = 1'000'000);

/// Draws the sequence-length process N(0), N(1), ... Owns its random stream;
/// never shared between runs.
///
/// Markov semantics: N(k) is drawn from the conditional row of the current
/// state g(k), after which the chain advances to g(k+1). A single-state chain
/// consumes exactly the same random numbers as the i.i.d. sampler.
class AvailabilitySampler {
public:
    AvailabilitySampler(const Availability& model, Rng rng);

    int next();

    /// Current chain state (0-based) for Markov models.
    std::optional<int> chain_state() const;

private:
    static std::vector<double> cumulative(const double* begin, const double* end);
    int draw_from(const std::vector<double>& cdf);

    Rng rng_;
    std::vector<std::vector<double>> length_cdf_;      // one row per chain state
    std::vector<std::vector<double>> transition_cdf_;  // empty for i.i.d.
    int state_ = 0;
    bool markov_ = false;
};

}  // namespace anytime
