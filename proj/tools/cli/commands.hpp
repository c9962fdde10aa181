#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"

namespace anytime::cli {

struct CommandOptions {
    std::filesystem::path config;
    Overrides overrides;
    std::optional<std::filesystem::path> out;
    std::vector<int> trace_runs;  // appended to output.trace_runs
};

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;

int cmd_simulate(const CommandOptions& options, std::ostream& out, std::ostream& err);
int cmd_stability(const CommandOptions& options, std::ostream& out, std::ostream& err);
int cmd_sweep(const CommandOptions& options, std::ostream& out, std::ostream& err);

struct SweepRow {
    double value = 0.0;
    CostSummary baseline;
    CostSummary a1;
    CostSummary a2;
    PairedComparison a1_vs_baseline;
    PairedComparison a2_vs_baseline;
    PairedComparison a2_vs_a1;
    std::optional<double> impr_a1_pct;  // unset when the baseline mean is undefined
    std::optional<double> impr_a2_pct;
};

/// Runs baseline, a1 and a2 at every grid point with the same master seed, so
/// run r sees identical availability and disturbance streams in all three.
std::vector<SweepRow> run_sweep(const ExperimentSpec& spec);

/// Shortest round-trip decimal; "inf", "-inf" and "nan" for non-finite values.
std::string format_number(double value);

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);
void write_runs_csv(std::ostream& os, const CostSummary& summary);
void write_trace_csv(std::ostream& os, const SimTrace& trace);

Json summary_json(const CostSummary& summary);
Json report_json(const StabilityReport& report);
void write_report_text(std::ostream& os, const StabilityReport& report);

}  // namespace anytime::cli
