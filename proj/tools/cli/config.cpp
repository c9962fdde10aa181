#include "config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>
#include <string_view>

#include "anytime/errors.hpp"

namespace anytime::cli {

namespace {

std::string join(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
}

void require_object(const Json& node, const std::string& path) {
    if (!node.is_object()) throw ConfigError(path.empty() ? "config" : path, "expected an object");
}

void allow_keys(const Json& node, const std::string& path, std::initializer_list<std::string_view> keys) {
    require_object(node, path);
    for (const auto& [key, value] : node.items()) {
        bool known = false;
        for (auto k : keys) known = known || key == k;
        if (!known) throw ConfigError(join(path, key), "unknown key");
    }
}

double as_number(const Json& value, const std::string& path) {
    if (!value.is_number()) throw ConfigError(path, "expected a number");
    return value.get<double>();
}

std::optional<double> number_at(const Json& node, std::string_view key, const std::string& path) {
    if (!node.contains(key)) return std::nullopt;
    return as_number(node.at(std::string(key)), join(path, key));
}

double number_or(const Json& node, std::string_view key, const std::string& path, double fallback) {
    return number_at(node, key, path).value_or(fallback);
}

double required_number(const Json& node, std::string_view key, const std::string& path) {
    const auto v = number_at(node, key, path);
    if (!v) throw ConfigError(join(path, key), "required");
    return *v;
}

long long as_integer(const Json& value, const std::string& path) {
    if (value.is_number_integer() || value.is_number_unsigned()) return value.get<long long>();
    if (value.is_number_float()) {
        const double d = value.get<double>();
        if (std::floor(d) == d && std::abs(d) < 9e15) return static_cast<long long>(d);
    }
    throw ConfigError(path, "expected an integer");
}

int int_or(const Json& node, std::string_view key, const std::string& path, int fallback) {
    if (!node.contains(key)) return fallback;
    const long long v = as_integer(node.at(std::string(key)), join(path, key));
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
        throw ConfigError(join(path, key), "out of range");
    return static_cast<int>(v);
}

std::string string_at(const Json& node, std::string_view key, const std::string& path) {
    if (!node.contains(key)) throw ConfigError(join(path, key), "required");
    const Json& v = node.at(std::string(key));
    if (!v.is_string()) throw ConfigError(join(path, key), "expected a string");
    return v.get<std::string>();
}

std::vector<double> number_array(const Json& value, const std::string& path) {
    if (!value.is_array()) throw ConfigError(path, "expected an array of numbers");
    std::vector<double> out;
    out.reserve(value.size());
    for (std::size_t i = 0; i < value.size(); ++i)
        out.push_back(as_number(value[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

Vector vector_from(const Json& value, const std::string& path) {
    const auto v = number_array(value, path);
    if (v.empty() || v.size() > static_cast<std::size_t>(kMaxDim))
        throw ConfigError(path, "dimension must be in [1, " + std::to_string(kMaxDim) + "]");
    Vector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
    return out;
}

Eigen::MatrixXd matrix_from(const Json& value, const std::string& path) {
    if (!value.is_array() || value.empty()) throw ConfigError(path, "expected a nonempty array of rows");
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < value.size(); ++i)
        rows.push_back(number_array(value[i], path + "[" + std::to_string(i) + "]"));
    const std::size_t cols = rows.front().size();
    for (const auto& row : rows)
        if (row.size() != cols) throw ConfigError(path, "rows have different lengths");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols; ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

void throw_problems(const std::vector<std::string>& problems, const std::string& path) {
    if (problems.empty()) return;
    std::string joined;
    for (const auto& p : problems) joined += (joined.empty() ? "" : "; ") + p;
    throw ConfigError(path, joined);
}

DisturbanceModel parse_disturbance(const Json& node, int dim) {
    const std::string path = "disturbance";
    allow_keys(node, path, {"kind", "lo", "hi", "mean", "variance"});
    const std::string kind = node.contains("kind") ? string_at(node, "kind", path) : "none";
    DisturbanceModel model;
    if (kind == "none") {
        model = DisturbanceModel::none(dim);
    } else if (kind == "uniform") {
        model = DisturbanceModel::uniform(dim, required_number(node, "lo", path),
                                          required_number(node, "hi", path));
    } else if (kind == "gaussian") {
        model = DisturbanceModel::gaussian(dim, number_or(node, "mean", path, 0.0),
                                           required_number(node, "variance", path));
    } else {
        throw ConfigError("disturbance.kind", "unknown kind '" + kind + "' (expected none|uniform|gaussian)");
    }
    if (model.kind != DisturbanceModel::Kind::none && dim == 0)
        throw ConfigError("disturbance.kind", "the plant takes no disturbance input");
    validate(model);
    return model;
}

ControllerSpec parse_controller(const Json& node, double& slack) {
    const std::string path = "controller";
    allow_keys(node, path, {"kind", "buffer_cap", "slack"});
    ControllerSpec spec;
    spec.kind = parse_controller_kind(node.contains("kind") ? string_at(node, "kind", path) : "baseline");
    if (node.contains("buffer_cap") && !node.at("buffer_cap").is_null()) {
        const int cap = int_or(node, "buffer_cap", path, 0);
        if (cap < 1) throw ConfigError("controller.buffer_cap", "must be >= 1");
        spec.buffer_cap = cap;
    }
    slack = number_or(node, "slack", path, slack);
    return spec;
}

InitialState parse_initial_state(const Json& node) {
    if (node.is_array()) return vector_from(node, "initial_state");
    allow_keys(node, "initial_state", {"box"});
    if (!node.contains("box")) throw ConfigError("initial_state.box", "required");
    const Json& box = node.at("box");
    allow_keys(box, "initial_state.box", {"lo", "hi"});
    if (!box.contains("lo") || !box.contains("hi"))
        throw ConfigError("initial_state.box", "needs lo and hi");
    return SamplingBox{vector_from(box.at("lo"), "initial_state.box.lo"),
                       vector_from(box.at("hi"), "initial_state.box.hi")};
}

}  // namespace

Json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open '" + path.string() + "'");
    try {
        return Json::parse(in, nullptr, true, true);
    } catch (const Json::parse_error& e) {
        throw ConfigError("config", std::string("malformed JSON: ") + e.what());
    }
}

void apply_overrides(Json& doc, const Overrides& overrides) {
    if (overrides.seed) doc["seed"] = *overrides.seed;
    if (overrides.runs) doc["runs"] = *overrides.runs;
    if (overrides.horizon) doc["horizon"] = *overrides.horizon;
    if (overrides.threads) doc["threads"] = *overrides.threads;
}

Availability parse_availability(const Json& node) {
    const std::string path = "availability";
    require_object(node, path);
    const std::string kind = string_at(node, "kind", path);
    Availability model;
    if (kind == "exec_time") {
        allow_keys(node, path, {"kind", "tau"});
        model = from_execution_time(required_number(node, "tau", path));
    } else if (kind == "iid") {
        allow_keys(node, path, {"kind", "p"});
        if (!node.contains("p")) throw ConfigError("availability.p", "required");
        model = IidAvailability{number_array(node.at("p"), "availability.p")};
    } else if (kind == "markov") {
        allow_keys(node, path, {"kind", "Q", "P", "initial_state"});
        if (!node.contains("Q")) throw ConfigError("availability.Q", "required");
        if (!node.contains("P")) throw ConfigError("availability.P", "required");
        MarkovAvailability markov;
        markov.transition = matrix_from(node.at("Q"), "availability.Q");
        markov.conditional = matrix_from(node.at("P"), "availability.P");
        if (node.contains("initial_state") && !node.at("initial_state").is_null()) {
            // 1-based in configuration files.
            const int s = int_or(node, "initial_state", path, 0);
            if (s < 1 || s > markov.transition.rows())
                throw ConfigError("availability.initial_state",
                                  "must be in [1, " + std::to_string(markov.transition.rows()) + "]");
            markov.initial_state = s - 1;
        }
        model = std::move(markov);
    } else {
        throw ConfigError("availability.kind", "unknown kind '" + kind + "' (expected iid|markov|exec_time)");
    }
    throw_problems(validate(model), path);
    return model;
}

PlantModel parse_plant(const Json& node) {
    const std::string path = "plant";
    allow_keys(node, path, {"name", "params"});
    const std::string name = string_at(node, "name", path);
    PlantParams params;
    if (node.contains("params")) {
        const Json& p = node.at("params");
        require_object(p, "plant.params");
        for (const auto& [key, value] : p.items()) params[key] = as_number(value, "plant.params." + key);
    }
    return make_builtin_plant(name, params);
}

SimConfig parse_sim_config(const Json& doc) {
    allow_keys(doc, "", {"plant", "disturbance", "availability", "controller", "horizon", "runs", "seed",
                         "threads", "initial_state", "cost", "overflow_guard", "output"});
    if (!doc.contains("plant")) throw ConfigError("plant", "required");
    if (!doc.contains("availability")) throw ConfigError("availability", "required");

    SimConfig config;
    config.plant = parse_plant(doc.at("plant"));
    config.disturbance = doc.contains("disturbance")
                             ? parse_disturbance(doc.at("disturbance"), config.plant.disturbance_dim)
                             : DisturbanceModel::none(config.plant.disturbance_dim);
    config.availability = parse_availability(doc.at("availability"));
    if (doc.contains("controller")) config.controller = parse_controller(doc.at("controller"), config.slack);
    config.horizon = int_or(doc, "horizon", "", config.horizon);
    config.runs = int_or(doc, "runs", "", config.runs);
    config.threads = int_or(doc, "threads", "", config.threads);
    if (doc.contains("seed")) {
        const Json& s = doc.at("seed");
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
            throw ConfigError("seed", "expected a non-negative 64-bit integer");
        config.master_seed = s.get<std::uint64_t>();
    }
    if (doc.contains("initial_state")) config.initial_state = parse_initial_state(doc.at("initial_state"));
    if (doc.contains("cost")) {
        const Json& c = doc.at("cost");
        allow_keys(c, "cost", {"q_x", "r_u"});
        config.weights.q_x = number_or(c, "q_x", "cost", config.weights.q_x);
        config.weights.r_u = number_or(c, "r_u", "cost", config.weights.r_u);
    }
    config.overflow_guard = number_or(doc, "overflow_guard", "", config.overflow_guard);
    if (doc.contains("output")) allow_keys(doc.at("output"), "output", {"trace_runs"});
    validate(config);
    return config;
}

std::vector<int> parse_trace_runs(const Json& doc) {
    std::vector<int> runs;
    if (!doc.contains("output") || !doc.at("output").contains("trace_runs")) return runs;
    const Json& list = doc.at("output").at("trace_runs");
    if (!list.is_array()) throw ConfigError("output.trace_runs", "expected an array of run indices");
    for (std::size_t i = 0; i < list.size(); ++i) {
        const long long r = as_integer(list[i], "output.trace_runs[" + std::to_string(i) + "]");
        if (r < 0 || r > std::numeric_limits<int>::max())
            throw ConfigError("output.trace_runs", "run indices must be non-negative");
        runs.push_back(static_cast<int>(r));
    }
    return runs;
}

CertificateInputs parse_certificate_inputs(const Json& doc) {
    allow_keys(doc, "", {"rho", "alpha", "availability", "plant"});
    if (!doc.contains("availability")) throw ConfigError("availability", "required");
    CertificateInputs inputs;
    std::optional<PlantModel> plant;
    if (doc.contains("plant")) plant = parse_plant(doc.at("plant"));

    if (const auto rho = number_at(doc, "rho", "")) {
        inputs.rho = *rho;
    } else if (plant) {
        inputs.rho = plant->rho;
    } else {
        throw ConfigError("rho", "required (or give a plant section)");
    }
    if (const auto alpha = number_at(doc, "alpha", "")) {
        inputs.alpha = *alpha;
    } else if (plant && plant->alpha) {
        inputs.alpha = *plant->alpha;
    } else {
        throw ConfigError("alpha", "required; the plant declares no growth bound");
    }
    if (!(inputs.rho >= 0.0 && inputs.rho < 1.0)) throw ConfigError("rho", "must lie in [0, 1)");
    if (!(inputs.alpha >= 1.0) || !std::isfinite(inputs.alpha))
        throw ConfigError("alpha", "must be finite and >= 1");
    inputs.availability = parse_availability(doc.at("availability"));
    return inputs;
}

Json experiment_template(const std::string& name) {
    if (name == "fig1") {
        return Json{{"sweep", {{"variable", "tau"}, {"grid", {0.1, 0.2, 0.3, 0.4, 0.5}}}},
                    {"base",
                     {{"plant", {{"name", "cubic_scalar"}}},
                      {"disturbance", {{"kind", "uniform"}, {"lo", 0.0}, {"hi", 0.01}}},
                      {"availability", {{"kind", "exec_time"}, {"tau", 0.1}}},
                      {"horizon", 10000},
                      {"runs", 200},
                      {"seed", 1}}}};
    }
    if (name == "fig2") {
        return Json{{"sweep", {{"variable", "a"}, {"grid", {0.9, 1.1, 1.3, 1.5}}}},
                    {"base",
                     {{"plant", {{"name", "linear_scalar"}, {"params", {{"a", 0.9}}}}},
                      {"disturbance", {{"kind", "gaussian"}, {"mean", 0.0}, {"variance", 0.1}}},
                      {"availability", {{"kind", "exec_time"}, {"tau", 0.3}}},
                      {"horizon", 10000},
                      {"runs", 200},
                      {"seed", 1}}}};
    }
    if (name == "fig3") {
        return Json{{"sweep", {{"variable", "buffer_cap"}, {"grid", {1, 2, 3, 4}}}},
                    {"base",
                     {{"plant", {{"name", "linear_scalar"}, {"params", {{"a", 1.7}}}}},
                      {"disturbance", {{"kind", "gaussian"}, {"mean", 0.0}, {"variance", 0.1}}},
                      {"availability", {{"kind", "exec_time"}, {"tau", 0.23}}},
                      {"horizon", 10000},
                      {"runs", 200},
                      {"seed", 1}}}};
    }
    if (name == "custom") return Json::object();
    throw ConfigError("experiment", "unknown experiment '" + name + "' (expected fig1|fig2|fig3|custom)");
}

ExperimentSpec parse_experiment(const Json& doc) {
    allow_keys(doc, "", {"experiment", "sweep", "base"});
    ExperimentSpec spec;
    spec.name = doc.contains("experiment") ? string_at(doc, "experiment", "") : "custom";
    Json merged = experiment_template(spec.name);
    merged.merge_patch(doc);

    if (!merged.contains("sweep")) throw ConfigError("sweep", "required");
    const Json& sweep = merged.at("sweep");
    allow_keys(sweep, "sweep", {"variable", "grid"});
    spec.variable = string_at(sweep, "variable", "sweep");
    if (spec.variable != "tau" && spec.variable != "a" && spec.variable != "buffer_cap")
        throw ConfigError("sweep.variable", "expected tau|a|buffer_cap");
    if (!sweep.contains("grid")) throw ConfigError("sweep.grid", "required");
    spec.grid = number_array(sweep.at("grid"), "sweep.grid");
    if (spec.grid.empty()) throw ConfigError("sweep.grid", "must not be empty");
    for (std::size_t i = 1; i < spec.grid.size(); ++i)
        if (!(spec.grid[i] > spec.grid[i - 1])) throw ConfigError("sweep.grid", "must be strictly increasing");
    if (spec.variable == "buffer_cap")
        for (double v : spec.grid)
            if (v < 1.0 || std::floor(v) != v) throw ConfigError("sweep.grid", "buffer caps must be integers >= 1");

    spec.base = merged.contains("base") ? merged.at("base") : Json::object();
    require_object(spec.base, "base");
    // Validate every grid point up front so a bad grid fails before any simulation.
    for (double v : spec.grid) {
        try {
            parse_sim_config(instantiate(spec, v, ControllerKind::baseline));
        } catch (const ConfigError& e) {
            if (e.key().rfind("availability", 0) == 0 || e.key().rfind("plant", 0) == 0 ||
                e.key().rfind("controller", 0) == 0)
                throw ConfigError(e.key(), std::string(e.what()) + " (sweep value " + std::to_string(v) + ")");
            throw;
        }
    }
    return spec;
}

Json instantiate(const ExperimentSpec& spec, double value, ControllerKind kind) {
    Json doc = spec.base;
    if (spec.variable == "tau") {
        doc["availability"] = Json{{"kind", "exec_time"}, {"tau", value}};
    } else if (spec.variable == "a") {
        doc["plant"]["params"]["a"] = value;
    } else if (spec.variable == "buffer_cap") {
        doc["controller"]["buffer_cap"] = static_cast<int>(value);
    }
    doc["controller"]["kind"] = std::string(to_string(kind));
    return doc;
}

}  // namespace anytime::cli
