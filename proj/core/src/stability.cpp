#include "anytime/stability.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "anytime/errors.hpp"

namespace anytime {

namespace {

void require_convergent(double p0, double alpha) {
    if (!(p0 * alpha < 1.0)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "assumption violated: p0*alpha = " << p0 * alpha << " >= 1, series diverges";
        throw DivergenceError(msg.str());
    }
}

void require_feasible(double p0) {
    if (!(p0 < 1.0)) throw PreconditionError("p0 must be < 1");
}

void require_state(const MarkovAvailability& model, int state) {
    if (state < 0 || state >= model.states()) {
        std::ostringstream msg;
        msg << "processor state " << state << " outside [0, " << model.states() << ")";
        throw PreconditionError(msg.str());
    }
    if (!(model.p0(state) < 1.0)) {
        std::ostringstream msg;
        msg << "processor state " << state << " has p_{0|s} = 1";
        throw DegenerateStateError(msg.str());
    }
}

void check_constants(double rho, double alpha) {
    if (!(rho >= 0.0 && rho < 1.0)) throw ConfigError("rho", "must lie in [0, 1)");
    if (!(alpha >= 1.0) || !std::isfinite(alpha)) throw ConfigError("alpha", "must be finite and >= 1");
}

void check_availability(const Availability& availability) {
    const auto problems = validate(availability);
    if (problems.empty()) return;
    std::string joined;
    for (const auto& p : problems) joined += (joined.empty() ? "" : "; ") + p;
    throw ConfigError("availability", joined);
}

}  // namespace

double baseline_margin(double p0, double alpha, double rho) {
    return p0 * alpha + (1.0 - p0) * rho;
}

double omega_l(int l, double p0, double rho, double alpha) {
    if (l < 1) throw PreconditionError("omega_l needs l >= 1");
    require_convergent(p0, alpha);
    const double pr = p0 * rho;
    const double pr_l = std::pow(pr, l);
    return rho * (1.0 - pr_l) / (1.0 - pr) + alpha * pr_l / (1.0 - p0 * alpha);
}

double omega(const IidAvailability& model, double rho, double alpha) {
    const double p0 = model.p0();
    require_convergent(p0, alpha);
    double total = 0.0;
    for (int l = 1; l <= model.max_length(); ++l)
        total += model.pmf[static_cast<std::size_t>(l)] * omega_l(l, p0, rho, alpha);
    return total;
}

double sigma(const IidAvailability& model, double rho, double alpha) {
    const double p0 = model.p0();
    require_feasible(p0);
    require_convergent(p0, alpha);
    const double pr = p0 * rho;
    double weighted = 0.0;
    for (int l = 1; l <= model.max_length(); ++l)
        weighted += model.pmf[static_cast<std::size_t>(l)] * std::pow(pr, l);
    return (rho * (1.0 - p0 * alpha) + (alpha - rho) / (1.0 - p0) * weighted) / (1.0 - pr);
}

double a1_margin(const IidAvailability& model, double rho, double alpha) {
    const double p0 = model.p0();
    return p0 * alpha + (1.0 - p0) * sigma(model, rho, alpha);
}

double seq_len_prob(const IidAvailability& model) {
    const double p0 = model.p0();
    require_feasible(p0);
    double total = 0.0;
    for (int l = 1; l <= model.max_length(); ++l)
        total += model.pmf[static_cast<std::size_t>(l)] * (1.0 - std::pow(p0, l));
    return total / (1.0 - p0);
}

double a2_overrun_prob(const IidAvailability& model, int lambda_prev) {
    if (lambda_prev < 0 || lambda_prev > model.max_length()) {
        std::ostringstream msg;
        msg << "lambda_prev = " << lambda_prev << " outside [0, " << model.max_length() << "]";
        throw PreconditionError(msg.str());
    }
    const double p0 = model.p0();
    require_feasible(p0);
    double total = 0.0;
    for (int l = 1; l <= model.max_length(); ++l)
        total += model.pmf[static_cast<std::size_t>(l)] *
                 (std::pow(p0, l) - std::pow(p0, std::max(l, lambda_prev - 1)));
    return total / (1.0 - p0);
}

MarkovBars markov_bars(const MarkovAvailability& model) {
    const Eigen::VectorXd p0 = model.conditional.col(0);
    MarkovBars bars;
    bars.q_bar_rows = model.transition;
    bars.Q_bar = p0.asDiagonal() * model.transition;
    bars.p_bar = Eigen::VectorXd::Ones(p0.size()) - p0;
    return bars;
}

double delta_pmf(const MarkovAvailability& model, int state, int j) {
    if (j < 1) throw PreconditionError("delta_pmf needs j >= 1");
    require_state(model, state);
    const MarkovBars bars = markov_bars(model);
    Eigen::RowVectorXd row = bars.q_bar_rows.row(state);
    for (int i = 1; i < j; ++i) row = row * bars.Q_bar;
    return row.dot(bars.p_bar);
}

double spectral_radius(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return 0.0;
    Eigen::EigenSolver<Eigen::MatrixXd> solver(m, false);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

UpsilonResult upsilon(const MarkovAvailability& model, double rho, double alpha) {
    const MarkovBars bars = markov_bars(model);
    const Eigen::Index g = bars.Q_bar.rows();
    UpsilonResult result;
    result.p_hat0 = model.conditional.col(0).maxCoeff();
    result.p_hat0_guard = alpha * result.p_hat0 < 1.0;
    result.spectral_radius_alpha_qbar = spectral_radius(alpha * bars.Q_bar);
    result.sharp_guard = result.spectral_radius_alpha_qbar < 1.0;
    if (!result.sharp_guard) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "spectral radius of alpha*Q_bar = " << result.spectral_radius_alpha_qbar
            << " >= 1, series diverges";
        throw DivergenceError(msg.str());
    }

    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(g, g);
    const Eigen::PartialPivLU<Eigen::MatrixXd> rho_lu(identity - rho * bars.Q_bar);
    const Eigen::PartialPivLU<Eigen::MatrixXd> alpha_lu(identity - alpha * bars.Q_bar);
    const Eigen::MatrixXd rho_qbar = rho * bars.Q_bar;

    // (rho Q_bar)^l for l = 1..Lambda, shared by every state.
    std::vector<Eigen::MatrixXd> powers;
    powers.reserve(static_cast<std::size_t>(model.max_length()));
    Eigen::MatrixXd power = identity;
    for (int l = 1; l <= model.max_length(); ++l) {
        power = power * rho_qbar;
        powers.push_back(power);
    }

    result.values.assign(static_cast<std::size_t>(g), std::nullopt);
    bool all_below = true;
    for (Eigen::Index s = 0; s < g; ++s) {
        const double p0s = model.conditional(s, 0);
        if (!(p0s < 1.0)) continue;
        Eigen::MatrixXd weighted = Eigen::MatrixXd::Zero(g, g);
        for (int l = 1; l <= model.max_length(); ++l)
            weighted += model.conditional(s, l) * powers[static_cast<std::size_t>(l - 1)];
        const Eigen::MatrixXd inner =
            rho * identity + (alpha - rho) / (1.0 - p0s) * alpha_lu.solve(weighted);
        const Eigen::VectorXd tail = inner * bars.p_bar;
        // q_bar (I - rho Q_bar)^{-1} v = ((I - rho Q_bar)^{-T} q_bar^T)^T v.
        const Eigen::VectorXd left =
            rho_lu.transpose().solve(Eigen::VectorXd(bars.q_bar_rows.row(s).transpose()));
        const double value = left.dot(tail);
        result.values[static_cast<std::size_t>(s)] = value;
        all_below = all_below && value < 1.0;
    }
    result.stable = result.sharp_guard && all_below;
    return result;
}

MarkovBaseline markov_baseline(const MarkovAvailability& model, double rho, double alpha) {
    MarkovBaseline out;
    out.p_hat0 = model.conditional.col(0).maxCoeff();
    out.margin = baseline_margin(out.p_hat0, alpha, rho);
    return out;
}

std::string_view to_string(Verdict verdict) {
    return verdict == Verdict::stable ? "stable" : "not_certified";
}

namespace {

Verdict verdict_of(double margin) { return margin < 1.0 ? Verdict::stable : Verdict::not_certified; }

void fill_iid(const IidAvailability& model, StabilityReport& report) {
    const double p0 = model.p0();
    report.p0 = p0;
    report.baseline_margin = baseline_margin(p0, report.alpha, report.rho);
    report.seq_len_prob = seq_len_prob(model);
    if (!(p0 * report.alpha < 1.0)) {
        report.assumption_violated = true;
        report.notes.push_back("assumption violated: p0*alpha >= 1; no verdict");
        return;
    }
    report.omega = omega(model, report.rho, report.alpha);
    report.sigma = sigma(model, report.rho, report.alpha);
    report.a1_margin = a1_margin(model, report.rho, report.alpha);
    report.verdicts["baseline"] = verdict_of(*report.baseline_margin);
    report.verdicts["a1"] = verdict_of(*report.a1_margin);
    report.verdicts["a2"] = report.verdicts["a1"];
    report.notes.push_back("the a1 certificate also certifies a2");
}

void fill_markov(const MarkovAvailability& model, StabilityReport& report) {
    const MarkovBaseline base = markov_baseline(model, report.rho, report.alpha);
    report.p_hat0 = base.p_hat0;
    report.markov_baseline_margin = base.margin;
    const MarkovBars bars = markov_bars(model);
    const double radius = spectral_radius(report.alpha * bars.Q_bar);
    report.spectral_radius_alpha_qbar = radius;
    report.sharp_guard = radius < 1.0;
    report.p_hat0_guard = report.alpha * base.p_hat0 < 1.0;

    if (*report.p_hat0_guard) {
        report.verdicts["markov_baseline"] = verdict_of(base.margin);
    } else {
        report.assumption_violated = true;
        report.notes.push_back("assumption violated: p_hat0*alpha >= 1; no markov_baseline verdict");
    }
    if (!*report.sharp_guard) {
        report.assumption_violated = true;
        report.notes.push_back("spectral radius of alpha*Q_bar >= 1; no markov_a1 verdict");
        return;
    }
    if (!*report.p_hat0_guard)
        report.notes.push_back(
            "sharp spectral guard holds but p_hat0*alpha >= 1; markov_a1 verdict relies on the "
            "sharp guard");
    const UpsilonResult ups = upsilon(model, report.rho, report.alpha);
    report.upsilon = ups.values;
    report.verdicts["markov_a1"] = ups.stable ? Verdict::stable : Verdict::not_certified;
}

}  // namespace

StabilityReport evaluate(const CertificateInputs& inputs) {
    check_constants(inputs.rho, inputs.alpha);
    check_availability(inputs.availability);
    StabilityReport report;
    report.rho = inputs.rho;
    report.alpha = inputs.alpha;
    report.max_length = max_length(inputs.availability);

    if (const auto* iid = std::get_if<IidAvailability>(&inputs.availability)) {
        fill_iid(*iid, report);
        return report;
    }
    const auto& markov = std::get<MarkovAvailability>(inputs.availability);
    if (markov.states() == 1) {
        IidAvailability single;
        single.pmf.resize(static_cast<std::size_t>(markov.max_length()) + 1);
        for (int l = 0; l <= markov.max_length(); ++l)
            single.pmf[static_cast<std::size_t>(l)] = markov.conditional(0, l);
        fill_iid(single, report);
    }
    fill_markov(markov, report);
    return report;
}

}  // namespace anytime
