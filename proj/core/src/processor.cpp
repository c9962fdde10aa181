#include "anytime/processor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "anytime/errors.hpp"

namespace anytime {

namespace {

constexpr double kSumTolerance = 1e-12;

void check_pmf(const std::vector<double>& pmf, const std::string& label,
               std::vector<std::string>& out) {
    for (std::size_t l = 0; l < pmf.size(); ++l) {
        if (!(pmf[l] >= 0.0)) {
            std::ostringstream msg;
            msg << "nonnegativity: " << label << "[" << l << "] = " << pmf[l] << " is negative";
            out.push_back(msg.str());
        }
    }
    const double sum = std::accumulate(pmf.begin(), pmf.end(), 0.0);
    if (!(std::abs(sum - 1.0) <= kSumTolerance)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "normalization: " << label << " sums to " << sum << ", expected 1";
        out.push_back(msg.str());
    }
}

// Boolean reachability closure of the support graph.
Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> support(const Eigen::MatrixXd& m) {
    return (m.array() > 0.0).matrix();
}

Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> bool_product(
    const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& a,
    const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& b) {
    const auto n = a.rows();
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> out =
        Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, b.cols(), false);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k < a.cols(); ++k)
            if (a(i, k))
                for (Eigen::Index j = 0; j < b.cols(); ++j) out(i, j) = out(i, j) || b(k, j);
    return out;
}

}  // namespace

int max_length(const Availability& model) {
    return std::visit([](const auto& m) { return m.max_length(); }, model);
}

IidAvailability from_execution_time(double tau) {
    if (!(tau > 0.0 && tau < 1.0)) {
        std::ostringstream msg;
        msg << "execution time must lie in (0, 1), got " << tau;
        throw ConfigError("availability.tau", msg.str());
    }
    const int lambda = static_cast<int>(std::floor(1.0 / tau + 1e-9));
    IidAvailability model;
    model.pmf.assign(static_cast<std::size_t>(lambda) + 1, tau);
    model.pmf.back() = std::max(0.0, 1.0 - lambda * tau);
    return model;
}

std::vector<std::string> validate(const IidAvailability& model) {
    std::vector<std::string> out;
    if (model.pmf.size() < 2) {
        out.emplace_back("shape: pmf needs at least two entries (p_0, ..., p_Lambda), Lambda >= 1");
        return out;
    }
    check_pmf(model.pmf, "p", out);
    if (!(model.pmf.front() < 1.0))
        out.emplace_back("feasibility: p_0 must be < 1 (the controller never runs otherwise)");
    return out;
}

std::vector<std::string> validate(const MarkovAvailability& model) {
    std::vector<std::string> out;
    const auto& q = model.transition;
    const auto& p = model.conditional;
    if (q.rows() < 1 || q.rows() != q.cols()) {
        out.emplace_back("shape: transition matrix Q must be square and non-empty");
        return out;
    }
    if (p.rows() != q.rows() || p.cols() < 2) {
        out.emplace_back(
            "shape: conditional pmf matrix P must have one row per chain state and Lambda + 1 >= 2 "
            "columns");
        return out;
    }
    for (Eigen::Index s = 0; s < q.rows(); ++s) {
        std::vector<double> row(q.cols());
        for (Eigen::Index j = 0; j < q.cols(); ++j) row[j] = q(s, j);
        check_pmf(row, "Q row " + std::to_string(s + 1), out);
    }
    bool any_feasible = false;
    for (Eigen::Index s = 0; s < p.rows(); ++s) {
        std::vector<double> row(p.cols());
        for (Eigen::Index j = 0; j < p.cols(); ++j) row[j] = p(s, j);
        check_pmf(row, "P row " + std::to_string(s + 1), out);
        any_feasible = any_feasible || p(s, 0) < 1.0;
    }
    if (!any_feasible)
        out.emplace_back("feasibility: every processor state has p_{0|s} = 1");
    if (!is_irreducible(q)) {
        out.emplace_back("irreducibility: some processor state cannot reach another");
    } else if (!is_primitive(q)) {
        out.emplace_back("aperiodicity: chain is periodic (Q^k never entrywise positive)");
    }
    if (model.initial_state && (*model.initial_state < 0 || *model.initial_state >= q.rows()))
        out.emplace_back("initial_state: out of range");
    return out;
}

std::vector<std::string> validate(const Availability& model) {
    return std::visit([](const auto& m) { return validate(m); }, model);
}

bool is_irreducible(const Eigen::MatrixXd& transition) {
    const auto n = transition.rows();
    auto reach = support(transition);
    for (Eigen::Index i = 0; i < n; ++i) reach(i, i) = true;
    // (I + A)^(n-1) by repeated squaring covers every path length < n.
    for (Eigen::Index len = 1; len < n; len *= 2) reach = bool_product(reach, reach);
    return reach.all();
}

bool is_primitive(const Eigen::MatrixXd& transition) {
    const auto n = transition.rows();
    const auto base = support(transition);
    auto power = base;
    for (Eigen::Index k = 1; k <= n * n; ++k) {
        if (power.all()) return true;
        power = bool_product(power, base);
    }
    return false;
}

Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& transition, double tolerance,
                                        int max_iterations) {
    const auto n = transition.rows();
    Eigen::RowVectorXd pi = Eigen::RowVectorXd::Constant(n, 1.0 / static_cast<double>(n));
    for (int it = 0; it < max_iterations; ++it) {
        Eigen::RowVectorXd next = pi * transition;
        next /= next.sum();
        const double change = (next - pi).lpNorm<1>();
        pi = next;
        if (change < tolerance) break;
    }
    return pi.transpose();
}

AvailabilitySampler::AvailabilitySampler(const Availability& model, Rng rng) : rng_(rng) {
    if (const auto* iid = std::get_if<IidAvailability>(&model)) {
        length_cdf_.push_back(cumulative(iid->pmf.data(), iid->pmf.data() + iid->pmf.size()));
        return;
    }
    const auto& markov = std::get<MarkovAvailability>(model);
    markov_ = true;
    const Eigen::Index g = markov.states();
    // Row-major copies so each row is contiguous.
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> p = markov.conditional;
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> q = markov.transition;
    for (Eigen::Index s = 0; s < g; ++s) {
        length_cdf_.push_back(cumulative(p.row(s).data(), p.row(s).data() + p.cols()));
        if (g > 1) transition_cdf_.push_back(cumulative(q.row(s).data(), q.row(s).data() + g));
    }
    if (markov.initial_state) {
        state_ = *markov.initial_state;
    } else if (g > 1) {
        const Eigen::VectorXd pi = stationary_distribution(markov.transition);
        state_ = draw_from(cumulative(pi.data(), pi.data() + g));
    }
}

int AvailabilitySampler::next() {
    const int n = draw_from(length_cdf_[static_cast<std::size_t>(state_)]);
    if (!transition_cdf_.empty()) state_ = draw_from(transition_cdf_[static_cast<std::size_t>(state_)]);
    return n;
}

std::optional<int> AvailabilitySampler::chain_state() const {
    if (!markov_) return std::nullopt;
    return state_;
}

std::vector<double> AvailabilitySampler::cumulative(const double* begin, const double* end) {
    std::vector<double> cdf(begin, end);
    std::partial_sum(cdf.begin(), cdf.end(), cdf.begin());
    return cdf;
}

int AvailabilitySampler::draw_from(const std::vector<double>& cdf) {
    const double u = rng_.uniform() * cdf.back();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    // Floating-point round-off can leave u == cdf.back(); fall back to the last
    // index with positive mass.
    if (it == cdf.end()) {
        auto idx = static_cast<int>(cdf.size()) - 1;
        while (idx > 0 && cdf[static_cast<std::size_t>(idx)] == cdf[static_cast<std::size_t>(idx - 1)]) --idx;
        return idx;
    }
    return static_cast<int>(it - cdf.begin());
}

}  // namespace anytime
