#include "commands.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>

#include "anytime/errors.hpp"

namespace anytime::cli {

namespace {

Json number_json(double value) {
    if (std::isfinite(value)) return value;
    return format_number(value);
}

Json optional_json(const std::optional<double>& value) {
    return value ? number_json(*value) : Json(nullptr);
}

std::ofstream open_output(const std::filesystem::path& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    std::ofstream os(dir / name, std::ios::binary);
    if (!os) throw Error("cannot write '" + (dir / name).string() + "'");
    return os;
}

void write_json_file(const std::filesystem::path& dir, const std::string& name, const Json& doc) {
    auto os = open_output(dir, name);
    os << doc.dump(2) << '\n';
}

Json paired_json(const PairedComparison& c) {
    return Json{{"joint_runs", c.joint_runs},
                {"candidate_divergences", c.candidate_divergences},
                {"reference_divergences", c.reference_divergences},
                {"mean_diff", number_json(c.mean_diff)},
                {"std_error", number_json(c.std_error)},
                {"ci_low", number_json(c.ci_low)},
                {"ci_high", number_json(c.ci_high)},
                {"no_worse", c.no_worse()},
                {"strictly_better", c.strictly_better()}};
}

template <class Body>
int guarded(std::ostream& err, Body&& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

std::optional<double> safe_improvement(const CostSummary& candidate, const CostSummary& reference) {
    if (!(reference.mean > 0.0) || !std::isfinite(reference.mean) || !std::isfinite(candidate.mean))
        return std::nullopt;
    return improvement_pct(candidate, reference);
}

}  // namespace

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto result = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, result.ptr);
}

Json summary_json(const CostSummary& s) {
    return Json{{"runs", s.runs},
                {"divergences", s.divergences},
                {"certificate_violations", s.certificate_violations},
                {"mean", number_json(s.mean)},
                {"std_error", number_json(s.std_error)},
                {"ci_low", number_json(s.ci_low)},
                {"ci_high", number_json(s.ci_high)},
                {"min", number_json(s.min)},
                {"max", number_json(s.max)}};
}

void write_runs_csv(std::ostream& os, const CostSummary& summary) {
    os << "run,cost,diverged\n";
    for (std::size_t r = 0; r < summary.costs.size(); ++r) {
        const double c = summary.costs[r];
        os << r << ',' << format_number(c) << ',' << (std::isfinite(c) ? 0 : 1) << '\n';
    }
}

void write_trace_csv(std::ostream& os, const SimTrace& trace) {
    const Eigen::Index n = trace.steps.empty() ? trace.final_state.size() : trace.steps.front().x.size();
    const Eigen::Index p = trace.steps.empty() ? 0 : trace.steps.front().u.size();
    os << 'k';
    for (Eigen::Index i = 0; i < n; ++i) os << ",x" << i + 1;
    for (Eigen::Index i = 0; i < p; ++i) os << ",u" << i + 1;
    os << ",N,lambda,V\n";
    for (const auto& rec : trace.steps) {
        os << rec.k;
        for (Eigen::Index i = 0; i < rec.x.size(); ++i) os << ',' << format_number(rec.x(i));
        for (Eigen::Index i = 0; i < rec.u.size(); ++i) os << ',' << format_number(rec.u(i));
        os << ',' << rec.n << ',' << rec.lambda << ',' << format_number(rec.v) << '\n';
    }
}

int cmd_simulate(const CommandOptions& options, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        Json doc = load_json(options.config);
        apply_overrides(doc, options.overrides);
        const SimConfig config = parse_sim_config(doc);
        std::vector<int> trace_runs = parse_trace_runs(doc);
        trace_runs.insert(trace_runs.end(), options.trace_runs.begin(), options.trace_runs.end());
        for (int r : trace_runs)
            if (r >= config.runs) throw ConfigError("output.trace_runs", "run index " + std::to_string(r) + " >= runs");

        const CostSummary summary = monte_carlo(config);

        out << "plant=" << config.plant.name << '\n'
            << "controller=" << to_string(config.controller.kind) << '\n'
            << "runs=" << summary.runs << '\n'
            << "horizon=" << config.horizon << '\n'
            << "seed=" << config.master_seed << '\n'
            << "mean=" << format_number(summary.mean) << '\n'
            << "std_error=" << format_number(summary.std_error) << '\n'
            << "ci_low=" << format_number(summary.ci_low) << '\n'
            << "ci_high=" << format_number(summary.ci_high) << '\n'
            << "divergences=" << summary.divergences << '\n'
            << "certificate_violations=" << summary.certificate_violations << '\n';

        if (options.out) {
            Json s = summary_json(summary);
            s["plant"] = config.plant.name;
            s["controller"] = std::string(to_string(config.controller.kind));
            s["horizon"] = config.horizon;
            s["seed"] = config.master_seed;
            write_json_file(*options.out, "summary.json", s);
            auto runs = open_output(*options.out, "runs.csv");
            write_runs_csv(runs, summary);
            for (int r : trace_runs) {
                auto os = open_output(*options.out, "trace_run" + std::to_string(r) + ".csv");
                write_trace_csv(os, run_episode(config, r));
            }
        } else if (!trace_runs.empty()) {
            err << "note: trace output needs --out; skipped\n";
        }
        return kExitOk;
    });
}

Json report_json(const StabilityReport& r) {
    Json doc{{"rho", r.rho},
             {"alpha", r.alpha},
             {"max_length", r.max_length},
             {"p0", optional_json(r.p0)},
             {"baseline_margin", optional_json(r.baseline_margin)},
             {"omega", optional_json(r.omega)},
             {"sigma", optional_json(r.sigma)},
             {"a1_margin", optional_json(r.a1_margin)},
             {"seq_len_prob", optional_json(r.seq_len_prob)},
             {"p_hat0", optional_json(r.p_hat0)},
             {"markov_baseline_margin", optional_json(r.markov_baseline_margin)},
             {"spectral_radius_alpha_qbar", optional_json(r.spectral_radius_alpha_qbar)},
             {"assumption_violated", r.assumption_violated}};
    if (r.sharp_guard) doc["sharp_guard"] = *r.sharp_guard;
    if (r.p_hat0_guard) doc["p_hat0_alpha_guard"] = *r.p_hat0_guard;
    if (!r.upsilon.empty()) {
        Json ups = Json::array();
        for (const auto& v : r.upsilon) ups.push_back(optional_json(v));
        doc["upsilon"] = ups;
    }
    Json verdicts = Json::object();
    for (const auto& [name, verdict] : r.verdicts) verdicts[name] = std::string(to_string(verdict));
    doc["verdicts"] = verdicts;
    doc["notes"] = r.notes;
    return doc;
}

void write_report_text(std::ostream& os, const StabilityReport& r) {
    auto line = [&](const char* key, const std::optional<double>& v) {
        if (v) os << key << '=' << format_number(*v) << '\n';
    };
    os << "rho=" << format_number(r.rho) << '\n' << "alpha=" << format_number(r.alpha) << '\n';
    os << "max_length=" << r.max_length << '\n';
    line("p0", r.p0);
    line("baseline_margin", r.baseline_margin);
    line("omega", r.omega);
    line("sigma", r.sigma);
    line("a1_margin", r.a1_margin);
    line("seq_len_prob", r.seq_len_prob);
    line("p_hat0", r.p_hat0);
    line("markov_baseline_margin", r.markov_baseline_margin);
    line("spectral_radius_alpha_qbar", r.spectral_radius_alpha_qbar);
    if (r.sharp_guard) os << "sharp_guard=" << (*r.sharp_guard ? "true" : "false") << '\n';
    if (r.p_hat0_guard) os << "p_hat0_alpha_guard=" << (*r.p_hat0_guard ? "true" : "false") << '\n';
    for (std::size_t s = 0; s < r.upsilon.size(); ++s)
        os << "upsilon_" << s + 1 << '=' << (r.upsilon[s] ? format_number(*r.upsilon[s]) : "n/a") << '\n';
    for (const auto& [name, verdict] : r.verdicts) os << "verdict_" << name << '=' << to_string(verdict) << '\n';
    for (const auto& note : r.notes) os << "note=" << note << '\n';
}

int cmd_stability(const CommandOptions& options, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Json doc = load_json(options.config);
        const StabilityReport report = evaluate(parse_certificate_inputs(doc));
        write_report_text(out, report);
        if (options.out) write_json_file(*options.out, "stability.json", report_json(report));
        return kExitOk;
    });
}

std::vector<SweepRow> run_sweep(const ExperimentSpec& spec) {
    std::vector<SweepRow> rows;
    rows.reserve(spec.grid.size());
    for (double value : spec.grid) {
        SweepRow row;
        row.value = value;
        row.baseline = monte_carlo(parse_sim_config(instantiate(spec, value, ControllerKind::baseline)));
        row.a1 = monte_carlo(parse_sim_config(instantiate(spec, value, ControllerKind::a1)));
        row.a2 = monte_carlo(parse_sim_config(instantiate(spec, value, ControllerKind::a2)));
        row.a1_vs_baseline = compare_paired(row.a1, row.baseline);
        row.a2_vs_baseline = compare_paired(row.a2, row.baseline);
        row.a2_vs_a1 = compare_paired(row.a2, row.a1);
        row.impr_a1_pct = safe_improvement(row.a1, row.baseline);
        row.impr_a2_pct = safe_improvement(row.a2, row.baseline);
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << "grid_value,cost_baseline,cost_a1,cost_a2,impr_a1_pct,impr_a2_pct,"
          "ci_low_baseline,ci_high_baseline,ci_low_a1,ci_high_a1,ci_low_a2,ci_high_a2,"
          "div_baseline,div_a1,div_a2\n";
    const auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string("nan"); };
    for (const auto& r : rows) {
        os << format_number(r.value) << ',' << format_number(r.baseline.mean) << ','
           << format_number(r.a1.mean) << ',' << format_number(r.a2.mean) << ',' << opt(r.impr_a1_pct)
           << ',' << opt(r.impr_a2_pct) << ',' << format_number(r.baseline.ci_low) << ','
           << format_number(r.baseline.ci_high) << ',' << format_number(r.a1.ci_low) << ','
           << format_number(r.a1.ci_high) << ',' << format_number(r.a2.ci_low) << ','
           << format_number(r.a2.ci_high) << ',' << r.baseline.divergences << ',' << r.a1.divergences
           << ',' << r.a2.divergences << '\n';
    }
}

int cmd_sweep(const CommandOptions& options, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        Json doc = load_json(options.config);
        if (!doc.is_object()) throw ConfigError("config", "expected an object");
        ExperimentSpec spec = parse_experiment(doc);
        apply_overrides(spec.base, options.overrides);
        // Re-validate with the overrides in place.
        for (double v : spec.grid) parse_sim_config(instantiate(spec, v, ControllerKind::baseline));

        const auto rows = run_sweep(spec);
        if (!options.out) {
            write_sweep_csv(out, rows);
            return kExitOk;
        }
        auto csv = open_output(*options.out, "sweep.csv");
        write_sweep_csv(csv, rows);
        Json summary{{"experiment", spec.name}, {"variable", spec.variable}, {"rows", Json::array()}};
        for (const auto& r : rows) {
            summary["rows"].push_back(Json{{"grid_value", r.value},
                                           {"baseline", summary_json(r.baseline)},
                                           {"a1", summary_json(r.a1)},
                                           {"a2", summary_json(r.a2)},
                                           {"impr_a1_pct", optional_json(r.impr_a1_pct)},
                                           {"impr_a2_pct", optional_json(r.impr_a2_pct)},
                                           {"a1_vs_baseline", paired_json(r.a1_vs_baseline)},
                                           {"a2_vs_baseline", paired_json(r.a2_vs_baseline)},
                                           {"a2_vs_a1", paired_json(r.a2_vs_a1)}});
        }
        write_json_file(*options.out, "sweep.json", summary);
        out << "experiment=" << spec.name << '\n'
            << "rows=" << rows.size() << '\n'
            << "csv=" << (*options.out / "sweep.csv").string() << '\n';
        return kExitOk;
    });
}

}  // namespace anytime::cli
