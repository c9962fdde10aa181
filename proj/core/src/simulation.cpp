#include "anytime/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "anytime/errors.hpp"

namespace anytime {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kZ95 = 1.96;

Vector initial_state_for(const SimConfig& config, int run_index) {
    if (!config.initial_state) return default_initial_state(config.plant);
    if (const auto* fixed = std::get_if<Vector>(&*config.initial_state)) return *fixed;
    Rng rng(derive_seed(config.master_seed, static_cast<std::uint64_t>(run_index),
                        Stream::initial_state));
    return std::get<SamplingBox>(*config.initial_state).sample(rng);
}

bool escaped(const Vector& x, double guard) {
    return !x.allFinite() || x.norm() > guard;
}

}  // namespace

void validate(const SimConfig& config) {
    validate(config.plant);
    validate(config.disturbance);
    if (config.disturbance.dim != config.plant.disturbance_dim)
        throw ConfigError("disturbance.dim", "does not match the plant disturbance dimension");
    const auto problems = validate(config.availability);
    if (!problems.empty()) {
        std::string joined;
        for (const auto& p : problems) joined += (joined.empty() ? "" : "; ") + p;
        throw ConfigError("availability", joined);
    }
    if (config.controller.buffer_cap && *config.controller.buffer_cap < 1)
        throw ConfigError("controller.buffer_cap", "must be >= 1");
    if (config.horizon < 1) throw ConfigError("horizon", "must be >= 1");
    if (config.runs < 1) throw ConfigError("runs", "must be >= 1");
    if (config.threads < 0) throw ConfigError("threads", "must be >= 0");
    if (!(config.weights.q_x >= 0.0)) throw ConfigError("cost.q_x", "must be >= 0");
    if (!(config.weights.r_u >= 0.0)) throw ConfigError("cost.r_u", "must be >= 0");
    if (!(config.slack >= 0.0)) throw ConfigError("controller.slack", "must be >= 0");
    if (!(config.overflow_guard > 0.0)) throw ConfigError("overflow_guard", "must be positive");
    if (config.initial_state) {
        const int n = config.plant.state_dim;
        if (const auto* fixed = std::get_if<Vector>(&*config.initial_state)) {
            if (fixed->size() != n)
                throw ConfigError("initial_state", "dimension does not match the plant state");
        } else {
            const auto& box = std::get<SamplingBox>(*config.initial_state);
            if (box.lo.size() != n || box.hi.size() != n)
                throw ConfigError("initial_state.box", "dimension does not match the plant state");
            if ((box.lo.array() > box.hi.array()).any())
                throw ConfigError("initial_state.box", "lower corner exceeds upper corner");
        }
    }
}

Vector default_initial_state(const PlantModel& plant) {
    return Vector::Ones(plant.state_dim);
}

EpisodeOutcome simulate_episode(const SimConfig& config, int run_index,
                                const StepObserver* observer, const std::vector<int>* forced_n) {
    const auto run = static_cast<std::uint64_t>(run_index);
    if (forced_n && static_cast<int>(forced_n->size()) < config.horizon)
        throw PreconditionError("forced sequence shorter than the horizon");

    AvailabilitySampler sampler(config.availability,
                                Rng(derive_seed(config.master_seed, run, Stream::availability)));
    Rng disturbance_rng(derive_seed(config.master_seed, run, Stream::disturbance));
    Controller controller(config.controller, config.plant, max_length(config.availability),
                          config.slack);

    Vector x = initial_state_for(config, run_index);
    const double q = config.weights.q_x;
    const double r = config.weights.r_u;
    double total = 0.0;

    EpisodeOutcome outcome;
    for (int k = 0; k < config.horizon; ++k) {
        const int n = forced_n ? (*forced_n)[static_cast<std::size_t>(k)] : sampler.next();
        Vector u;
        try {
            u = controller.step(x, n);
        } catch (const CertificateViolation&) {
            outcome.diverged = true;
            outcome.certificate_violation = true;
            break;
        }
        total += q * x.squaredNorm() + r * u.squaredNorm();
        if (observer) {
            const int lambda = controller.buffer().effective_length;
            (*observer)(StepRecord{k, x, u, n, lambda, config.plant.lyapunov(x)});
        }
        const Vector w = draw(config.disturbance, disturbance_rng);
        x = config.plant.dynamics(x, u, w);
        outcome.steps = k + 1;
        if (escaped(x, config.overflow_guard)) {
            outcome.diverged = true;
            break;
        }
    }
    outcome.final_state = x;
    outcome.cost = outcome.diverged ? kInf : total / static_cast<double>(config.horizon);
    return outcome;
}

namespace {

SimTrace trace_episode(const SimConfig& config, int run_index, const std::vector<int>* forced) {
    SimTrace trace;
    trace.run_index = run_index;
    trace.horizon = config.horizon;
    trace.steps.reserve(static_cast<std::size_t>(config.horizon));
    const StepObserver observer = [&trace](const StepRecord& rec) { trace.steps.push_back(rec); };
    const EpisodeOutcome outcome = simulate_episode(config, run_index, &observer, forced);
    trace.final_state = outcome.final_state;
    trace.diverged = outcome.diverged;
    trace.certificate_violation = outcome.certificate_violation;
    return trace;
}

}  // namespace

SimTrace run_episode(const SimConfig& config, int run_index) {
    return trace_episode(config, run_index, nullptr);
}

SimTrace run_episode(const SimConfig& config, int run_index, const std::vector<int>& forced_n) {
    return trace_episode(config, run_index, &forced_n);
}

double empirical_cost(const SimTrace& trace, double q_x, double r_u) {
    if (trace.diverged) return kInf;
    if (trace.horizon < 1) return 0.0;
    double total = 0.0;
    for (const auto& rec : trace.steps) total += q_x * rec.x.squaredNorm() + r_u * rec.u.squaredNorm();
    return total / static_cast<double>(trace.horizon);
}

CostSummary summarize(std::vector<double> costs) {
    CostSummary s;
    s.runs = static_cast<int>(costs.size());
    double sum = 0.0;
    int finite = 0;
    s.min = kInf;
    s.max = -kInf;
    for (double c : costs) {
        if (!std::isfinite(c)) {
            ++s.divergences;
            continue;
        }
        ++finite;
        sum += c;
        s.min = std::min(s.min, c);
        s.max = std::max(s.max, c);
    }
    if (finite == 0) {
        s.mean = s.std_error = s.ci_low = s.ci_high = s.min = s.max = kNaN;
        s.costs = std::move(costs);
        return s;
    }
    s.mean = sum / finite;
    double ss = 0.0;
    for (double c : costs)
        if (std::isfinite(c)) ss += (c - s.mean) * (c - s.mean);
    s.std_error = finite > 1 ? std::sqrt(ss / (finite - 1) / finite) : 0.0;
    s.ci_low = s.mean - kZ95 * s.std_error;
    s.ci_high = s.mean + kZ95 * s.std_error;
    s.costs = std::move(costs);
    return s;
}

CostSummary monte_carlo(const SimConfig& config) {
    validate(config);
    std::vector<double> costs(static_cast<std::size_t>(config.runs), 0.0);
    std::vector<char> violations(static_cast<std::size_t>(config.runs), 0);
    int threads = config.threads > 0 ? config.threads
                                     : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    threads = std::min(threads, config.runs);

    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (int r = next.fetch_add(1); r < config.runs; r = next.fetch_add(1)) {
            try {
                const EpisodeOutcome outcome = simulate_episode(config, r);
                costs[static_cast<std::size_t>(r)] = outcome.cost;
                violations[static_cast<std::size_t>(r)] = outcome.certificate_violation ? 1 : 0;
            } catch (...) {
                const std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(config.runs);
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
    CostSummary summary = summarize(std::move(costs));
    summary.certificate_violations = static_cast<int>(std::count(violations.begin(), violations.end(), 1));
    return summary;
}

double improvement_pct(const CostSummary& candidate, const CostSummary& reference) {
    if (!(reference.mean > 0.0) || !std::isfinite(reference.mean)) {
        std::ostringstream msg;
        msg << "undefined improvement: reference mean " << reference.mean
            << " is not finite and positive";
        throw PreconditionError(msg.str());
    }
    return 100.0 * (reference.mean - candidate.mean) / reference.mean;
}

bool PairedComparison::no_worse() const {
    if (candidate_divergences > reference_divergences) return false;
    if (candidate_divergences < reference_divergences) return true;
    return joint_runs == 0 || ci_low <= 0.0;
}

bool PairedComparison::strictly_better() const {
    if (candidate_divergences != reference_divergences)
        return candidate_divergences < reference_divergences;
    return joint_runs > 0 && ci_high < 0.0;
}

PairedComparison compare_paired(const CostSummary& candidate, const CostSummary& reference) {
    if (candidate.costs.size() != reference.costs.size())
        throw PreconditionError("paired comparison needs equal run counts");
    PairedComparison out;
    out.candidate_divergences = candidate.divergences;
    out.reference_divergences = reference.divergences;
    std::vector<double> diffs;
    diffs.reserve(candidate.costs.size());
    for (std::size_t i = 0; i < candidate.costs.size(); ++i)
        if (std::isfinite(candidate.costs[i]) && std::isfinite(reference.costs[i]))
            diffs.push_back(candidate.costs[i] - reference.costs[i]);
    out.joint_runs = static_cast<int>(diffs.size());
    if (diffs.empty()) {
        out.mean_diff = out.std_error = out.ci_low = out.ci_high = kNaN;
        return out;
    }
    const CostSummary d = summarize(std::move(diffs));
    out.mean_diff = d.mean;
    out.std_error = d.std_error;
    out.ci_low = d.ci_low;
    out.ci_high = d.ci_high;
    return out;
}

}  // namespace anytime
