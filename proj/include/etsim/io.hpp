#pragma once

#include <string>
#include <vector>

#include "etsim/orchestrator.hpp"

namespace etsim {

enum class OutputFormat { Csv, Json };
OutputFormat output_format_from_string(const std::string& s);

/// Formats a double with 12 significant digits (the precision of every float
/// in emitted files).
std::string format_double(double v);

/// Trace rows: k, agent, x_true..., x_hat..., x_check..., e, e_hat, gamma,
/// E_bar, E_mean, E_var, ell, kappa. State vectors expand to one column per
/// component; e and e_hat are Euclidean norms (the per-component values are
/// recoverable from the state columns). Requires a trace with recorded steps.
void emit_trace(const SimTrace& trace, const std::string& path, OutputFormat format);

/// Sweep rows: C, comm_avg, err_avg, err_std, runs.
void emit_sweep(const SweepSummary& summary, const std::string& path, OutputFormat format);

/// Allocation rows: round, agent, decided_at, lead_time.
void emit_allocation(const std::vector<AllocationRecord>& log, const std::string& path,
                     OutputFormat format);

/// Minimal CSV reader for round-trip checks and downstream tooling: returns
/// rows of cells, the header first.
std::vector<std::vector<std::string>> read_csv(const std::string& path);

}  // namespace etsim
