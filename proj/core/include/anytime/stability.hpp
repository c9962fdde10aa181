#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "anytime/processor.hpp"

namespace anytime {

// i.i.d. certificates. `p0 alpha < 1` is required wherever a series over the
// idle gap appears; violations raise DivergenceError.

/// p0 alpha + (1 - p0) rho.
double baseline_margin(double p0, double alpha, double rho);

/// Omega_l = rho (1 - (p0 rho)^l) / (1 - p0 rho) + alpha (p0 rho)^l / (1 - p0 alpha).
double omega_l(int l, double p0, double rho, double alpha);

/// sum_{l=1}^{Lambda} p_l Omega_l.
double omega(const IidAvailability& model, double rho, double alpha);

/// sigma = (rho (1 - p0 alpha) + (alpha - rho)/(1 - p0) sum_l p_l (p0 rho)^l) / (1 - p0 rho).
double sigma(const IidAvailability& model, double rho, double alpha);

/// p0 alpha + (1 - p0) sigma.
double a1_margin(const IidAvailability& model, double rho, double alpha);

/// Pr{Delta <= N(k_i)} = sum_l p_l (1 - p0^l) / (1 - p0).
double seq_len_prob(const IidAvailability& model);

/// Pr{N(k_i) < Delta <= lambda(k_i)} for lambda(k_i - 1) = lambda_prev:
/// sum_l p_l (p0^l - p0^max(l, lambda_prev - 1)) / (1 - p0).
/// Throws PreconditionError unless 0 <= lambda_prev <= Lambda.
double a2_overrun_prob(const IidAvailability& model, int lambda_prev);

// Markov-modulated certificates.

struct MarkovBars {
    Eigen::MatrixXd q_bar_rows;  // row s is q_bar_s (= row s of Q)
    Eigen::MatrixXd Q_bar;       // diag(p_{0|s}) Q
    Eigen::VectorXd p_bar;       // (1 - p_{0|s})_s
};

MarkovBars markov_bars(const MarkovAvailability& model);

/// Pr{Delta = j | g(k_i) = s} = q_bar_s Q_bar^{j-1} p_bar. `state` is 0-based.
/// Throws DegenerateStateError when p_{0|s} = 1.
double delta_pmf(const MarkovAvailability& model, int state, int j);

/// Largest eigenvalue modulus.
double spectral_radius(const Eigen::MatrixXd& m);

struct UpsilonResult {
    // Upsilon_s per state; empty for states with p_{0|s} = 1.
    std::vector<std::optional<double>> values;
    double spectral_radius_alpha_qbar = 0.0;  // rho(alpha Q_bar); must be < 1
    double p_hat0 = 0.0;
    bool sharp_guard = false;  // rho(alpha Q_bar) < 1
    bool p_hat0_guard = false;  // alpha p_hat0 < 1
    bool stable = false;       // sharp_guard and Upsilon_s < 1 for every admissible s
};

/**
 * Upsilon_s = q_bar_s (I - rho Q_bar)^{-1}
 *             (rho I + (alpha - rho)/(1 - p_{0|s}) (I - alpha Q_bar)^{-1}
 *              sum_l p_{l|s} (rho Q_bar)^l) p_bar.
 * Throws DivergenceError when the spectral radius of alpha Q_bar is >= 1.
 */
UpsilonResult upsilon(const MarkovAvailability& model, double rho, double alpha);

struct MarkovBaseline {
    double p_hat0 = 0.0;
    double margin = 0.0;
};

/// p_hat0 = max_s p_{0|s}; margin p_hat0 alpha + (1 - p_hat0) rho.
MarkovBaseline markov_baseline(const MarkovAvailability& model, double rho, double alpha);

// Aggregate report.

struct CertificateInputs {
    double rho = 0.0;
    double alpha = 1.0;
    Availability availability;
};

enum class Verdict { stable, not_certified };

std::string_view to_string(Verdict verdict);

/**
 * Every certificate applicable to the inputs. Fields left unset were not
 * evaluated (e.g. the convergence assumption failed). A single-state Markov
 * input also fills the i.i.d. fields from its only conditional row.
 *
 * Verdict keys: baseline, a1, a2, markov_baseline, markov_a1.
 */
struct StabilityReport {
    double rho = 0.0;
    double alpha = 1.0;
    int max_length = 0;

    std::optional<double> p0;
    std::optional<double> baseline_margin;
    std::optional<double> omega;
    std::optional<double> sigma;
    std::optional<double> a1_margin;
    std::optional<double> seq_len_prob;

    std::optional<double> p_hat0;
    std::optional<double> markov_baseline_margin;
    std::vector<std::optional<double>> upsilon;
    std::optional<double> spectral_radius_alpha_qbar;
    std::optional<bool> sharp_guard;
    std::optional<bool> p_hat0_guard;

    bool assumption_violated = false;
    std::map<std::string, Verdict> verdicts;
    std::vector<std::string> notes;
};

/// Throws ConfigError for invalid rho, alpha or availability.
StabilityReport evaluate(const CertificateInputs& inputs);

}  // namespace anytime
