#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "anytime/controller.hpp"
#include "anytime/plant.hpp"
#include "anytime/processor.hpp"

namespace anytime {

using InitialState = std::variant<Vector, SamplingBox>;

struct CostWeights {
    double q_x = 0.2;
    double r_u = 2.0;
};

struct SimConfig {
    PlantModel plant;
    DisturbanceModel disturbance;
    Availability availability;
    ControllerSpec controller;
    int horizon = 10'000;
    int runs = 200;
    std::uint64_t master_seed = 1;
    // Unset: default_initial_state(plant).
    std::optional<InitialState> initial_state;
    CostWeights weights;
    double slack = 1e-9;
    double overflow_guard = 1e12;
    // 0 selects std::thread::hardware_concurrency().
    int threads = 0;
};

/// Throws ConfigError naming the offending key.
void validate(const SimConfig& config);

/// 1 for scalar plants, (1, ..., 1) otherwise.
Vector default_initial_state(const PlantModel& plant);

struct StepRecord {
    int k = 0;
    Vector x;
    Vector u;
    int n = 0;
    int lambda = 0;
    double v = 0.0;
};

struct SimTrace {
    int run_index = 0;
    int horizon = 0;
    std::vector<StepRecord> steps;  // k = 0 .. K-1, truncated on divergence
    Vector final_state;             // x(K), or the first state past the guard
    bool diverged = false;
    // The decrease test failed; the episode stopped there and counts as diverged.
    bool certificate_violation = false;
};

/// Per-step callback; receives records in increasing k.
using StepObserver = std::function<void(const StepRecord&)>;

struct EpisodeOutcome {
    double cost = 0.0;  // +inf when diverged
    bool diverged = false;
    bool certificate_violation = false;
    int steps = 0;
    Vector final_state;
};

/**
 * One closed-loop episode. Per step k: draw N(k), compute u(k) and the buffer
 * update, draw w(k), x(k+1) = f(x(k), u(k), w(k)). Availability, disturbance
 * and initial state use independent streams derived from (master_seed, run).
 * `forced_n`, when given, replaces the availability draws and must hold at
 * least `horizon` entries.
 *
 * A CertificateViolation from the controller ends the episode as diverged
 * with `certificate_violation` set. It arises when the nominal closed-loop map
 * can no longer be resolved in double precision (e.g. |x| ~ 1e4 on the cubic
 * plant) or when (V, kappa, rho) is inconsistent.
 */
EpisodeOutcome simulate_episode(const SimConfig& config, int run_index,
                                const StepObserver* observer = nullptr,
                                const std::vector<int>* forced_n = nullptr);

SimTrace run_episode(const SimConfig& config, int run_index);
SimTrace run_episode(const SimConfig& config, int run_index, const std::vector<int>& forced_n);

/// (1/K) sum_k (q_x |x(k)|^2 + r_u |u(k)|^2); +inf for a diverged trace.
double empirical_cost(const SimTrace& trace, double q_x, double r_u);

struct CostSummary {
    std::vector<double> costs;  // per run, +inf when diverged
    int runs = 0;
    int divergences = 0;              // includes certificate violations
    int certificate_violations = 0;
    // Over non-diverged runs; NaN when none finished.
    double mean = 0.0;
    double std_error = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double min = 0.0;
    double max = 0.0;
};

/// Aggregates per-run costs: mean +/- 1.96 standard errors over finite runs.
CostSummary summarize(std::vector<double> costs);

/// Runs config.runs episodes in parallel. Results depend only on the config,
/// never on the thread count.
CostSummary monte_carlo(const SimConfig& config);

/// 100 (reference.mean - candidate.mean) / reference.mean. Throws
/// PreconditionError unless the reference mean is finite and positive.
double improvement_pct(const CostSummary& candidate, const CostSummary& reference);

/// Candidate minus reference over runs finite in both (common random numbers).
struct PairedComparison {
    int joint_runs = 0;
    int candidate_divergences = 0;
    int reference_divergences = 0;
    double mean_diff = 0.0;
    double std_error = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;

    /// Fewer or equal divergences and the difference is not significantly
    /// positive at 95%.
    bool no_worse() const;
    /// Fewer divergences, or equal divergences and a significantly negative
    /// difference.
    bool strictly_better() const;
};

/// Both summaries must come from the same master seed and run count.
PairedComparison compare_paired(const CostSummary& candidate, const CostSummary& reference);

}  // namespace anytime
