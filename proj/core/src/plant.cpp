#include "anytime/plant.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "anytime/errors.hpp"

namespace anytime {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double param_or(const PlantParams& params, std::string_view key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

void reject_unknown(const PlantParams& params, std::string_view plant,
                    std::initializer_list<std::string_view> allowed) {
    for (const auto& [key, value] : params) {
        bool known = false;
        for (auto a : allowed) known = known || key == a;
        if (!known) {
            throw ConfigError("plant.params." + key,
                              "unknown parameter for plant '" + std::string(plant) + "'");
        }
    }
}

double sat(double mu) { return std::clamp(mu, -1.0, 1.0); }

Vector scalar(double v) {
    Vector out(1);
    out(0) = v;
    return out;
}

SamplingBox box_from(const PlantParams& params, int dim) {
    const double half = param_or(params, "box", 10.0);
    if (!(half > 0.0)) throw ConfigError("plant.params.box", "must be positive");
    return SamplingBox::cube(dim, -half, half);
}

PlantModel cubic_scalar(const PlantParams& params) {
    reject_unknown(params, "cubic_scalar", {"alpha", "box"});
    PlantModel p;
    p.name = "cubic_scalar";
    p.state_dim = 1;
    p.input_dim = 1;
    p.disturbance_dim = 1;
    p.dynamics = [](const Vector& x, const Vector& u, const Vector& w) {
        const double xk = x(0);
        return scalar(xk + 0.01 * (xk * xk * xk + u(0)) + w(0));
    };
    p.lyapunov = [](const Vector& x) { return std::abs(x(0)); };
    p.policy = [](const Vector& x) {
        const double xk = x(0);
        return scalar(-xk * xk * xk - xk);
    };
    p.rho = 0.99;
    if (auto it = params.find("alpha"); it != params.end()) p.alpha = it->second;
    p.lower_bound = [](double s) { return s; };
    p.upper_bound = [](double s) { return s; };
    p.input_limit = Vector::Constant(1, kInf);
    p.box = box_from(params, 1);
    return p;
}

PlantModel linear_scalar(const PlantParams& params) {
    reject_unknown(params, "linear_scalar", {"a", "q", "r", "box"});
    const double a = param_or(params, "a", 1.5);
    const double q = param_or(params, "q", 0.2);
    const double r = param_or(params, "r", 2.0);
    if (!(q > 0.0)) throw ConfigError("plant.params.q", "must be positive");
    if (!(r > 0.0)) throw ConfigError("plant.params.r", "must be positive");
    const double gain = scalar_lqr_gain(a, 1.0, q, r);

    PlantModel p;
    p.name = "linear_scalar";
    p.state_dim = 1;
    p.input_dim = 1;
    p.disturbance_dim = 1;
    p.dynamics = [a](const Vector& x, const Vector& u, const Vector& w) {
        return scalar(a * x(0) + u(0) + w(0));
    };
    p.lyapunov = [](const Vector& x) { return std::abs(x(0)); };
    p.policy = [gain](const Vector& x) { return scalar(-gain * x(0)); };
    p.rho = std::abs(a - gain);
    p.alpha = std::max(1.0, std::abs(a));
    p.lower_bound = [](double s) { return s; };
    p.upper_bound = [](double s) { return s; };
    p.input_limit = Vector::Constant(1, kInf);
    p.box = box_from(params, 1);
    return p;
}

PlantModel sat_2d(const PlantParams& params) {
    reject_unknown(params, "sat_2d", {"box"});
    PlantModel p;
    p.name = "sat_2d";
    p.state_dim = 2;
    p.input_dim = 2;
    p.disturbance_dim = 1;
    p.dynamics = [](const Vector& x, const Vector& u, const Vector& w) {
        Vector next(2);
        next(0) = x(1) + u(0) + (std::sqrt(w(0) * w(0) + 5.0) - std::sqrt(5.0));
        next(1) = -sat(x(0) + x(1)) + u(1);
        return next;
    };
    p.lyapunov = [](const Vector& x) { return 2.0 * x.norm(); };
    p.policy = [](const Vector& x) {
        Vector u(2);
        u(0) = -x(1);
        u(1) = 0.8 * sat(x(0) + x(1));
        return u;
    };
    p.rho = 0.5;
    p.alpha = 1.618;
    p.lower_bound = [](double s) { return 2.0 * s; };
    p.upper_bound = [](double s) { return 2.0 * s; };
    p.input_limit = Vector(2);
    p.input_limit << kInf, 0.8;
    p.box = box_from(params, 2);
    return p;
}

PlantModel log_lyapunov(const PlantParams& params) {
    reject_unknown(params, "log_lyapunov", {"rho", "box"});
    const double rho = param_or(params, "rho", 0.5);
    PlantModel p;
    p.name = "log_lyapunov";
    p.state_dim = 1;
    p.input_dim = 1;
    p.disturbance_dim = 0;
    p.dynamics = [](const Vector& x, const Vector& u, const Vector&) {
        return scalar(x(0) * x(0) + u(0));
    };
    p.lyapunov = [](const Vector& x) { return std::log1p(std::abs(x(0))); };
    p.policy = [rho](const Vector& x) {
        const double v = std::log1p(std::abs(x(0)));
        return scalar(-x(0) * x(0) + std::expm1(rho * v));
    };
    p.rho = rho;
    p.alpha = 2.0;
    p.lower_bound = [](double s) { return std::log1p(s); };
    p.upper_bound = [](double s) { return std::log1p(s); };
    p.input_limit = Vector::Constant(1, kInf);
    p.box = box_from(params, 1);
    return p;
}

}  // namespace

Vector SamplingBox::sample(Rng& rng) const {
    Vector x(lo.size());
    for (Eigen::Index i = 0; i < lo.size(); ++i) x(i) = rng.uniform(lo(i), hi(i));
    return x;
}

void validate(const PlantModel& plant) {
    if (plant.state_dim < 1 || plant.state_dim > kMaxDim)
        throw ConfigError("plant.state_dim", "must be in [1, " + std::to_string(kMaxDim) + "]");
    if (plant.input_dim < 1 || plant.input_dim > kMaxDim)
        throw ConfigError("plant.input_dim", "must be in [1, " + std::to_string(kMaxDim) + "]");
    if (plant.disturbance_dim < 0 || plant.disturbance_dim > kMaxDim)
        throw ConfigError("plant.disturbance_dim",
                          "must be in [0, " + std::to_string(kMaxDim) + "]");
    if (!plant.dynamics || !plant.lyapunov || !plant.policy)
        throw ConfigError("plant", "dynamics, lyapunov and policy must all be set");
    if (!(plant.rho >= 0.0 && plant.rho < 1.0))
        throw ConfigError("plant.rho", "contraction factor must lie in [0, 1)");
    if (plant.alpha && !(*plant.alpha >= 1.0))
        throw ConfigError("plant.alpha", "growth factor must be >= 1");
    if (plant.box.lo.size() != plant.state_dim || plant.box.hi.size() != plant.state_dim)
        throw ConfigError("plant.box", "sampling box dimension does not match the state");
    if ((plant.box.lo.array() > plant.box.hi.array()).any())
        throw ConfigError("plant.box", "lower corner exceeds upper corner");
}

Vector step(const PlantModel& plant, const Vector& x, const Vector& u, const Vector& w) {
    if (x.size() != plant.state_dim || u.size() != plant.input_dim ||
        w.size() != plant.disturbance_dim) {
        std::ostringstream msg;
        msg << plant.name << ": expected (x, u, w) of sizes (" << plant.state_dim << ", "
            << plant.input_dim << ", " << plant.disturbance_dim << "), got (" << x.size() << ", "
            << u.size() << ", " << w.size() << ")";
        throw DimensionError(msg.str());
    }
    return plant.dynamics(x, u, w);
}

PlantModel make_builtin_plant(std::string_view name, const PlantParams& params) {
    PlantModel plant;
    if (name == "cubic_scalar") {
        plant = cubic_scalar(params);
    } else if (name == "linear_scalar") {
        plant = linear_scalar(params);
    } else if (name == "sat_2d") {
        plant = sat_2d(params);
    } else if (name == "log_lyapunov") {
        plant = log_lyapunov(params);
    } else {
        throw ConfigError("plant.name", "unknown plant '" + std::string(name) +
                                            "' (expected cubic_scalar, linear_scalar, sat_2d "
                                            "or log_lyapunov)");
    }
    validate(plant);
    return plant;
}

double scalar_lqr_gain(double a, double b, double q, double r, double tolerance) {
    // P = q + a^2 P - (a b P)^2 / (r + b^2 P)
    double cost_to_go = q;
    for (int it = 0; it < 1'000'000; ++it) {
        const double next =
            q + a * a * cost_to_go - (a * b * cost_to_go) * (a * b * cost_to_go) /
                                         (r + b * b * cost_to_go);
        if (std::abs(next - cost_to_go) <= tolerance * std::max(1.0, std::abs(next))) {
            cost_to_go = next;
            return a * b * cost_to_go / (r + b * b * cost_to_go);
        }
        cost_to_go = next;
    }
    throw DivergenceError("scalar Riccati recursion did not converge");
}

LyapunovCheck check_lyapunov_conditions(const PlantModel& plant, int samples, std::uint64_t seed,
                                        double slack) {
    LyapunovCheck report;
    Rng rng(seed);
    const Vector zero_u = Vector::Zero(plant.input_dim);

    auto record = [&](double lhs, double rhs, const char* what, const Vector& x) {
        const double excess = lhs - rhs;
        report.worst_excess = std::max(report.worst_excess, excess);
        if (excess > slack) {
            if (report.violations == 0) {
                std::ostringstream msg;
                msg << what << " violated at x = [" << x.transpose() << "]: " << lhs << " > "
                    << rhs;
                report.first_violation = msg.str();
            }
            ++report.violations;
        }
    };

    for (int i = 0; i < samples; ++i) {
        const Vector x = plant.box.sample(rng);
        const double v = plant.lyapunov(x);
        const double norm = x.norm();
        if (plant.lower_bound) record(plant.lower_bound(norm), v, "lower sandwich bound", x);
        if (plant.upper_bound) record(v, plant.upper_bound(norm), "upper sandwich bound", x);
        const Vector closed = nominal_step(plant, x, plant.policy(x));
        record(plant.lyapunov(closed), plant.rho * v, "closed-loop contraction", x);
        if (plant.alpha) {
            const Vector open = nominal_step(plant, x, zero_u);
            record(plant.lyapunov(open), *plant.alpha * v, "open-loop growth bound", x);
        }
        ++report.samples;
    }
    return report;
}

void validate(const DisturbanceModel& model) {
    if (model.dim < 0 || model.dim > kMaxDim)
        throw ConfigError("disturbance.dim", "out of range");
    switch (model.kind) {
    case DisturbanceModel::Kind::none:
        break;
    case DisturbanceModel::Kind::uniform:
        if (!(model.lo <= model.hi)) throw ConfigError("disturbance.lo", "must not exceed hi");
        break;
    case DisturbanceModel::Kind::gaussian:
        if (!(model.variance >= 0.0))
            throw ConfigError("disturbance.variance", "must be non-negative");
        break;
    }
}

Vector draw(const DisturbanceModel& model, Rng& rng) {
    Vector w = Vector::Zero(model.dim);
    switch (model.kind) {
    case DisturbanceModel::Kind::none:
        break;
    case DisturbanceModel::Kind::uniform:
        for (int i = 0; i < model.dim; ++i) w(i) = rng.uniform(model.lo, model.hi);
        break;
    case DisturbanceModel::Kind::gaussian: {
        const double sd = std::sqrt(model.variance);
        for (int i = 0; i < model.dim; ++i) w(i) = sd > 0.0 ? rng.normal(model.mean, sd) : model.mean;
        break;
    }
    }
    return w;
}

std::string_view to_string(DisturbanceModel::Kind kind) {
    switch (kind) {
    case DisturbanceModel::Kind::none: return "none";
    case DisturbanceModel::Kind::uniform: return "uniform";
    case DisturbanceModel::Kind::gaussian: return "gaussian";
    }
    return "unknown";
}

}  // namespace anytime
