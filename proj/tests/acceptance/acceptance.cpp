// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any
// failure. `anytime_acceptance 3 7` runs only criteria 3 and 7.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "anytime/controller.hpp"
#include "anytime/simulation.hpp"
#include "anytime/stability.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "oracles.hpp"

namespace {

using namespace anytime;
namespace at = anytime::testing;

// Pinned tolerances.
constexpr double kIdentityTol = 1e-12;  // relative to max(1, |value|)
constexpr double kSeriesTol = 1e-9;
constexpr double kSpecialTol = 1e-12;
constexpr double kStatSigmas = 3.0;     // binomial / mean standard errors
constexpr double kCiZ = 1.96;           // 95% two-sided
constexpr double kNearOptimalRel = 0.05;
constexpr long long kGapEpisodes = 1'000'000;
constexpr int kRandomInstances = 200;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            if (!pass) detail << "; ";
            else detail.str("");
            pass = false;
            detail << what;
        }
    }
};

std::string fmt(double v, int precision = 6) {
    std::ostringstream os;
    os << std::setprecision(precision) << v;
    return os.str();
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

Vector v1(double a) { return Vector::Constant(1, a); }

// 1 ---------------------------------------------------------------------------
void example_one(Outcome& out) {
    const auto plant = make_builtin_plant("cubic_scalar");
    const std::vector<int> n_seq{5, 0, 1, 0};

    for (auto kind : {ControllerKind::a1, ControllerKind::a2}) {
        Controller c({kind, std::nullopt}, plant, 5);
        Vector x = v1(1.0);
        std::vector<Vector> u;
        std::vector<int> lambda;
        std::vector<BufferState> buffers;
        std::vector<Vector> states;
        for (int n : n_seq) {
            states.push_back(x);
            u.push_back(c.step(x, n));
            lambda.push_back(c.buffer().effective_length);
            buffers.push_back(c.buffer());
            x = nominal_step(plant, x, u.back());
        }
        const auto s0 = tentative_sequence(plant, states[0], 5).controls;  // u_1(0)..u_5(0)
        const auto s2 = tentative_sequence(plant, states[2], 1).controls;  // u_1(2)
        const Vector zero = v1(0.0);
        auto buf = [&](std::vector<Vector> slots, int l) {
            BufferState b(5, 1);
            for (std::size_t i = 0; i < slots.size(); ++i) b.slots[i] = slots[i];
            b.effective_length = l;
            return b;
        };
        const std::string tag = std::string(to_string(kind)) + ": ";
        if (kind == ControllerKind::a1) {
            out.require(lambda == std::vector<int>{5, 4, 1, 0}, tag + "lambda sequence");
            out.require(u[0] == s0[0] && u[1] == s0[1] && u[2] == s2[0] && u[3] == zero, tag + "inputs");
            out.require(buffers[0] == buf({s0[0], s0[1], s0[2], s0[3], s0[4]}, 5) &&
                            buffers[1] == buf({s0[1], s0[2], s0[3], s0[4]}, 4) &&
                            buffers[2] == buf({s2[0]}, 1) && buffers[3] == buf({}, 0),
                        tag + "buffers");
        } else {
            out.require(lambda == std::vector<int>{5, 4, 3, 2}, tag + "lambda sequence");
            out.require(u[0] == s0[0] && u[1] == s0[1] && u[2] == s2[0] && u[3] == s0[3], tag + "inputs");
            out.require(buffers[0] == buf({s0[0], s0[1], s0[2], s0[3], s0[4]}, 5) &&
                            buffers[1] == buf({s0[1], s0[2], s0[3], s0[4]}, 4) &&
                            buffers[2] == buf({s2[0], s0[3], s0[4]}, 3) &&
                            buffers[3] == buf({s0[3], s0[4]}, 2),
                        tag + "buffers");
        }
    }
    if (out.pass) out.detail << "a1 lambda=(5,4,1,0) u(3)=0; a2 lambda=(5,4,3,2) u(3)=u4(0); buffers exact";
}

// 2 ---------------------------------------------------------------------------
void gap_versus_length(Outcome& out) {
    std::uint64_t seed = 101;
    for (double tau : {0.23, 0.3, 0.45}) {
        const auto model = from_execution_time(tau);
        const double p = seq_len_prob(model);
        const auto f = at::gap_within_length_frequency(model, seed++, kGapEpisodes);
        const double se = at::binomial_se(p, f.episodes);
        const double z = (f.estimate - p) / se;
        out.require(std::abs(z) <= kStatSigmas, "tau=" + fmt(tau) + " z=" + fmt(z, 3));
        if (out.pass) out.detail << "tau=" << tau << " p=" << fmt(p) << " mc=" << fmt(f.estimate) << " z=" << fmt(z, 3) << "; ";
    }
}

// 3 ---------------------------------------------------------------------------
void identities(Outcome& out) {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < kRandomInstances; ++i) {
        const int lambda = 1 + static_cast<int>(gen() % 6);
        const auto pmf = at::random_pmf(gen, lambda, 0.0, 0.9);
        const double rho = 0.99 * unit(gen);
        const double alpha = 1.0 + 0.95 * unit(gen) * (1.0 / pmf[0] - 1.0);
        const IidAvailability iid{pmf};
        const double target = (1.0 - pmf[0]) * sigma(iid, rho, alpha) / (1.0 - pmf[0] * alpha);
        const double om = omega(iid, rho, alpha);

        MarkovAvailability single;
        single.transition = Eigen::MatrixXd::Ones(1, 1);
        single.conditional = Eigen::Map<const Eigen::RowVectorXd>(pmf.data(), lambda + 1);
        const double ups = *upsilon(single, rho, alpha).values[0];

        out.require(close(om, target, kIdentityTol), "omega identity instance " + std::to_string(i));
        out.require(close(ups, target, kIdentityTol), "upsilon reduction instance " + std::to_string(i));
        worst = std::max({worst, std::abs(om - target), std::abs(ups - target)});
        for (int j = 1; j <= 40; ++j) {
            const double d = delta_pmf(single, 0, j);
            const double g = at::geometric_pmf(pmf[0], j);
            out.require(close(d, g, kIdentityTol), "geometric law instance " + std::to_string(i));
            worst = std::max(worst, std::abs(d - g));
        }
    }
    if (out.pass) out.detail << kRandomInstances << " instances, max abs error " << fmt(worst, 3);
}

// 4 ---------------------------------------------------------------------------
void series_oracles(Outcome& out) {
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = 0.0;
    int markov_checked = 0;
    for (int i = 0; i < kRandomInstances; ++i) {
        const int lambda = 1 + static_cast<int>(gen() % 6);
        const auto pmf = at::random_pmf(gen, lambda, 0.0, 0.8);
        const double rho = 0.99 * unit(gen);
        // Keep p0 alpha <= 0.9 so 500 terms leave a negligible tail.
        const double alpha = 1.0 + unit(gen) * std::max(0.0, 0.9 / pmf[0] - 1.0);
        const IidAvailability iid{pmf};
        for (int l = 1; l <= lambda; ++l) {
            const double a = omega_l(l, pmf[0], rho, alpha);
            const double b = at::series_omega_l(l, pmf[0], rho, alpha);
            out.require(close(a, b, kSeriesTol), "omega_l instance " + std::to_string(i));
            worst = std::max(worst, std::abs(a - b));
        }
        const double a = omega(iid, rho, alpha);
        const double b = at::series_omega(pmf, rho, alpha);
        out.require(close(a, b, kSeriesTol), "omega instance " + std::to_string(i));
        worst = std::max(worst, std::abs(a - b));

        const int g = 1 + static_cast<int>(gen() % 4);
        MarkovAvailability m;
        m.transition = at::random_stochastic(gen, g, g);
        m.conditional.resize(g, lambda + 1);
        for (int s = 0; s < g; ++s) {
            const auto row = at::random_pmf(gen, lambda, 0.0, 0.85);
            for (int l = 0; l <= lambda; ++l) m.conditional(s, l) = row[static_cast<std::size_t>(l)];
        }
        const Eigen::MatrixXd q_bar = markov_bars(m).Q_bar;
        const double alpha_m = 1.0 + unit(gen) * 0.5;
        if (spectral_radius(alpha_m * q_bar) > 0.9) continue;
        const auto ups = upsilon(m, rho, alpha_m);
        for (int s = 0; s < g; ++s) {
            const double x = *ups.values[static_cast<std::size_t>(s)];
            const double y = at::series_upsilon(m.transition, m.conditional, s, rho, alpha_m);
            out.require(close(x, y, kSeriesTol), "upsilon instance " + std::to_string(i));
            worst = std::max(worst, std::abs(x - y));
        }
        ++markov_checked;
    }
    out.require(markov_checked >= kRandomInstances / 2, "too few Markov instances passed the guard");
    if (out.pass)
        out.detail << kRandomInstances << " i.i.d. + " << markov_checked << " Markov instances, max abs error "
                   << fmt(worst, 3);
}

// 5 ---------------------------------------------------------------------------
void special_cases(Outcome& out) {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double min_gap = 1.0;
    for (int i = 0; i < kRandomInstances; ++i) {
        const double p0 = 0.95 * unit(gen);
        const double rho = 0.99 * unit(gen);
        const double alpha = 1.0 + 0.95 * unit(gen) * (1.0 / std::max(p0, 1e-3) - 1.0);
        const IidAvailability single{{p0, 1.0 - p0}};
        out.require(std::abs(sigma(single, rho, alpha) - rho) <= kSpecialTol, "sigma != rho for length-one pmf");
        out.require(std::abs(a1_margin(single, rho, alpha) - baseline_margin(p0, alpha, rho)) <= kSpecialTol,
                    "a1 margin != baseline margin for length-one pmf");

        // Strict improvement needs some idle probability and some contraction.
        const int lambda = 2 + static_cast<int>(gen() % 5);
        const auto pmf = at::random_pmf(gen, lambda, 0.05, 0.9);
        const double r = 0.05 + 0.94 * unit(gen);
        const double a = 1.0 + 0.95 * unit(gen) * (1.0 / pmf[0] - 1.0);
        const double s = sigma(IidAvailability{pmf}, r, a);
        out.require(s < r, "sigma not strictly below rho, instance " + std::to_string(i));
        min_gap = std::min(min_gap, r - s);
    }
    if (out.pass) out.detail << "length-one pmf: sigma = rho; longer pmfs: min(rho - sigma) = " << fmt(min_gap, 3);
}

// 6-8 -------------------------------------------------------------------------
std::vector<cli::SweepRow> sweep(const std::string& experiment) {
    return cli::run_sweep(cli::parse_experiment(cli::Json{{"experiment", experiment}}));
}

void tau_sweep(Outcome& out) {
    const auto rows = sweep("fig1");
    for (const auto& r : rows) {
        const std::string tag = "tau=" + fmt(r.value);
        out.detail << tag << " J(b,a1,a2)=(" << fmt(r.baseline.mean, 4) << "," << fmt(r.a1.mean, 4) << ","
                   << fmt(r.a2.mean, 4) << ") div=(" << r.baseline.divergences << "," << r.a1.divergences << ","
                   << r.a2.divergences << "); ";
    }
    std::ostringstream failures;
    bool ok = true;
    for (const auto& r : rows) {
        const std::string tag = "tau=" + fmt(r.value);
        if (!r.a2_vs_a1.no_worse() || !r.a1_vs_baseline.no_worse()) {
            ok = false;
            failures << tag << " ordering; ";
        }
        if (r.value >= 0.2 - 1e-12 &&
            (!r.a1_vs_baseline.strictly_better() || !r.a2_vs_baseline.strictly_better())) {
            ok = false;
            failures << tag << " improvement not strictly positive; ";
        }
    }
    out.pass = ok;
    if (!ok) out.detail << "FAILED: " << failures.str();
}

void parameter_sweep(Outcome& out) {
    const auto rows = sweep("fig2");
    for (auto kind : {ControllerKind::a1, ControllerKind::a2}) {
        std::vector<double> impr, se;
        for (const auto& r : rows) {
            const auto& cand = kind == ControllerKind::a1 ? r.a1 : r.a2;
            const auto& cmp = kind == ControllerKind::a1 ? r.a1_vs_baseline : r.a2_vs_baseline;
            impr.push_back(improvement_pct(cand, r.baseline));
            se.push_back(100.0 * cmp.std_error / r.baseline.mean);
            out.require(cmp.no_worse(), std::string(to_string(kind)) + " worse than baseline at a=" + fmt(r.value));
        }
        for (std::size_t i = 1; i < impr.size(); ++i) {
            const double slack = kCiZ * std::hypot(se[i], se[i - 1]);
            out.require(impr[i] >= impr[i - 1] - slack,
                        std::string(to_string(kind)) + " improvement decreases at a=" + fmt(rows[i].value));
        }
        if (out.pass) {
            out.detail << to_string(kind) << " impr%=";
            for (std::size_t i = 0; i < impr.size(); ++i)
                out.detail << (i ? "," : "(") << fmt(impr[i], 3);
            out.detail << ") ";
        }
    }
}

void buffer_cap_sweep(Outcome& out) {
    const auto rows = sweep("fig3");
    for (auto kind : {ControllerKind::a1, ControllerKind::a2}) {
        const auto pick = [&](const cli::SweepRow& r) -> const CostSummary& {
            return kind == ControllerKind::a1 ? r.a1 : r.a2;
        };
        const std::string name(to_string(kind));
        for (std::size_t i = 1; i < rows.size(); ++i)
            out.require(compare_paired(pick(rows[i]), pick(rows[i - 1])).no_worse(),
                        name + " cost increases at cap " + fmt(rows[i].value));
        const auto cap1 = compare_paired(pick(rows[0]), rows[0].baseline);
        out.require(cap1.joint_runs == 0 || (cap1.ci_low <= 0.0 && cap1.ci_high >= 0.0),
                    name + " cap 1 differs from baseline");
        const double m3 = pick(rows[2]).mean, m4 = pick(rows[3]).mean;
        out.require(std::abs(m3 - m4) <= kNearOptimalRel * m4, name + " cap 3 not within 5% of cap 4");
        if (out.pass) {
            out.detail << name << " J(cap1..4)=";
            for (std::size_t i = 0; i < rows.size(); ++i) out.detail << (i ? "," : "(") << fmt(pick(rows[i]).mean, 4);
            out.detail << ") ";
        }
    }
    if (out.pass) out.detail << "baseline=" << fmt(rows[0].baseline.mean, 4);
}

// 9-10 ------------------------------------------------------------------------
void exhaustive_recursions(Outcome& out) {
    const auto plant = make_builtin_plant("linear_scalar", {{"a", 1.2}});
    long long sequences = 0;
    for (int cap = 1; cap <= 4; ++cap) {
        at::for_each_sequence(6, cap, [&](const std::vector<int>& seq) {
            ++sequences;
            BufferState b1(cap, 1), b2(cap, 1);
            int l1 = 0, l2 = 0;
            double x = 0.7;
            for (int n : seq) {
                x = -1.1 * x + 0.3;
                const Eigen::MatrixXd before = at::stack(b2);
                apply_step(ControllerKind::a1, plant, v1(x), n, b1);
                apply_step(ControllerKind::a2, plant, v1(x), n, b2);
                l1 = at::lambda_a1(l1, n);
                l2 = at::lambda_a2(l2, n);
                if (b1.effective_length != l1 || b2.effective_length != l2) {
                    out.require(false, "lambda recursion mismatch at cap " + std::to_string(cap));
                    return;
                }
                const Eigen::MatrixXd expected =
                    n >= 1 ? at::a2_matrix_update(before, tentative_sequence(plant, v1(x), n).controls)
                           : Eigen::MatrixXd(at::shift_matrix(cap) * before);
                if (!(at::stack(b2) == expected)) {
                    out.require(false, "a2 slot update differs from matrix form at cap " + std::to_string(cap));
                    return;
                }
            }
        });
    }
    if (out.pass) out.detail << sequences << " sequences, caps 1..4: lambda recursions and matrix form exact";
}

void small_buffer_equivalence(Outcome& out) {
    const auto plant = make_builtin_plant("cubic_scalar");
    long long sequences = 0;
    for (int cap : {1, 2}) {
        at::for_each_sequence(6, cap, [&](const std::vector<int>& seq) {
            ++sequences;
            BufferState b1(cap, 1), b2(cap, 1);
            Vector x1 = v1(1.0), x2 = v1(1.0);
            for (int n : seq) {
                const Vector u1 = apply_step(ControllerKind::a1, plant, x1, n, b1);
                const Vector u2 = apply_step(ControllerKind::a2, plant, x2, n, b2);
                if (!(u1 == u2) || !(b1 == b2)) {
                    out.require(false, "traces differ at cap " + std::to_string(cap));
                    return;
                }
                x1 = nominal_step(plant, x1, u1);
                x2 = nominal_step(plant, x2, u2);
            }
        });
    }
    if (out.pass) out.detail << sequences << " sequences: a1 and a2 inputs and buffers identical";
}

// 11 --------------------------------------------------------------------------
void certificate_decay(Outcome& out) {
    constexpr double kTau = 0.45;
    const auto plant = make_builtin_plant("sat_2d");
    const auto model = from_execution_time(kTau);
    const double margin = a1_margin(model, plant.rho, *plant.alpha);
    const double base = baseline_margin(model.p0(), *plant.alpha, plant.rho);
    out.require(margin < 1.0, "a1 margin not below 1");

    // k = 10 precedes the required checkpoints; under w = 0 kappa reaches the
    // origin in finitely many steps, so later means are often exactly zero.
    const std::vector<int> checkpoints{10, 100, 1000, 10000};
    for (auto kind : {ControllerKind::a1, ControllerKind::a2}) {
        SimConfig c;
        c.plant = plant;
        c.disturbance = DisturbanceModel::none(plant.disturbance_dim);
        c.availability = model;
        c.controller.kind = kind;
        c.horizon = checkpoints.back() + 1;
        c.runs = 500;
        c.master_seed = 11;
        std::vector<std::vector<double>> samples(checkpoints.size());
        for (int r = 0; r < c.runs; ++r) {
            const StepObserver observer = [&](const StepRecord& rec) {
                for (std::size_t i = 0; i < checkpoints.size(); ++i)
                    if (rec.k == checkpoints[i]) samples[i].push_back(rec.v);
            };
            simulate_episode(c, r, &observer);
        }
        std::vector<CostSummary> ev;
        for (auto& s : samples) ev.push_back(summarize(s));
        const double v0 = plant.lyapunov(default_initial_state(plant));
        const std::string name(to_string(kind));
        out.require(ev[0].mean + kStatSigmas * ev[0].std_error < v0, name + " no decay from V(x0) by k=10");
        for (std::size_t i = 1; i < ev.size(); ++i) {
            const double slack = kStatSigmas * std::hypot(ev[i].std_error, ev[i - 1].std_error);
            out.require(ev[i].mean <= ev[i - 1].mean + slack,
                        name + " E V increases at k=" + std::to_string(checkpoints[i]));
        }
        if (out.pass)
            out.detail << name << " EV(1e1,1e2,1e3,1e4)=(" << fmt(ev[0].mean, 3) << "," << fmt(ev[1].mean, 3)
                       << "," << fmt(ev[2].mean, 3) << "," << fmt(ev[3].mean, 3) << ") ";
    }
    if (out.pass)
        out.detail << "tau=" << kTau << " a1_margin=" << fmt(margin, 4) << " baseline_margin=" << fmt(base, 4);
}

struct Criterion {
    int id;
    const char* name;
    std::function<void(Outcome&)> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria{
        {1, "example trace exactness", example_one},
        {2, "gap-versus-length probability (Monte Carlo)", gap_versus_length},
        {3, "algebraic identities", identities},
        {4, "series oracles", series_oracles},
        {5, "special-case recovery", special_cases},
        {6, "cubic plant execution-time sweep", tau_sweep},
        {7, "linear plant system-parameter sweep", parameter_sweep},
        {8, "buffer-size sweep", buffer_cap_sweep},
        {9, "exhaustive recursion and matrix form", exhaustive_recursions},
        {10, "a1/a2 equivalence for buffers of size 1 and 2", small_buffer_equivalence},
        {11, "certificate versus simulated decay", certificate_decay},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

    int failures = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && !only.count(c.id)) continue;
        Outcome out;
        const auto start = std::chrono::steady_clock::now();
        try {
            c.run(out);
        } catch (const std::exception& e) {
            out.pass = false;
            out.detail.str("");
            out.detail << "exception: " << e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failures += out.pass ? 0 : 1;
        std::cout << (out.pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << " (" << fmt(secs, 3)
                  << " s): " << out.detail.str() << std::endl;
    }
    std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
    return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
