#include "etsim/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace etsim {

OutputFormat output_format_from_string(const std::string& s) {
  if (s == "csv") return OutputFormat::Csv;
  if (s == "json") return OutputFormat::Json;
  throw ConfigError("unknown output format '" + s + "' (expected csv or json)");
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

namespace {

using nlohmann::json;

// Numbers pass through format_double so CSV and JSON agree digit for digit.
json num(double v) { return json::parse(format_double(v)); }

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
  return out;
}

void write_row(std::ofstream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out << ',';
    out << cells[i];
  }
  out << '\n';
}

std::vector<std::string> trace_header(const SimTrace& trace) {
  std::vector<std::string> head{"k", "agent"};
  const int n = static_cast<int>(trace.steps.front().agents.front().x_true.size());
  for (const char* base : {"x_true", "x_hat", "x_check"}) {
    for (int d = 0; d < n; ++d) head.push_back(std::string(base) + "_" + std::to_string(d));
  }
  head.insert(head.end(), {"e", "e_hat", "gamma", "E_bar", "E_mean", "E_var", "ell", "kappa"});
  return head;
}

std::vector<std::string> trace_row(const StepRecord& rec, int agent) {
  const AgentStepRecord& a = rec.agents[agent];
  std::vector<std::string> row{std::to_string(rec.step), std::to_string(agent)};
  for (const Vector* v : {&a.x_true, &a.x_hat, &a.x_check}) {
    for (Eigen::Index d = 0; d < v->size(); ++d) row.push_back(format_double((*v)[d]));
  }
  row.push_back(format_double(a.remote_error.norm()));
  row.push_back(format_double(a.local_error.norm()));
  row.push_back(std::to_string(a.fired));
  row.push_back(format_double(a.signal.total));
  row.push_back(format_double(a.signal.mean_part));
  row.push_back(format_double(a.signal.variance_part));
  row.push_back(std::to_string(a.last_fired));
  row.push_back(std::to_string(a.last_scheduled));
  return row;
}

}  // namespace

void emit_trace(const SimTrace& trace, const std::string& path, OutputFormat format) {
  if (trace.steps.empty()) throw ConfigError("emit_trace: trace has no recorded steps");
  if (format == OutputFormat::Csv) {
    auto out = open_out(path);
    write_row(out, trace_header(trace));
    for (const StepRecord& rec : trace.steps) {
      for (int agent = 0; agent < trace.n_agents; ++agent) write_row(out, trace_row(rec, agent));
    }
    return;
  }
  json rows = json::array();
  const auto header = trace_header(trace);
  for (const StepRecord& rec : trace.steps) {
    for (int agent = 0; agent < trace.n_agents; ++agent) {
      const auto cells = trace_row(rec, agent);
      json row;
      for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == "k" || header[c] == "agent" || header[c] == "gamma" || header[c] == "ell" ||
            header[c] == "kappa") {
          row[header[c]] = std::stoll(cells[c]);
        } else {
          row[header[c]] = json::parse(cells[c]);
        }
      }
      rows.push_back(std::move(row));
    }
  }
  open_out(path) << rows.dump(1) << '\n';
}

void emit_sweep(const SweepSummary& summary, const std::string& path, OutputFormat format) {
  if (format == OutputFormat::Csv) {
    auto out = open_out(path);
    write_row(out, {"C", "comm_avg", "err_avg", "err_std", "runs"});
    for (const SweepPoint& p : summary.points) {
      write_row(out, {format_double(p.cost), format_double(p.comm_avg), format_double(p.err_avg),
                      format_double(p.err_std), std::to_string(p.runs)});
    }
    return;
  }
  json rows = json::array();
  for (const SweepPoint& p : summary.points) {
    rows.push_back({{"C", num(p.cost)},
                    {"comm_avg", num(p.comm_avg)},
                    {"err_avg", num(p.err_avg)},
                    {"err_std", num(p.err_std)},
                    {"runs", p.runs}});
  }
  open_out(path) << rows.dump(1) << '\n';
}

void emit_allocation(const std::vector<AllocationRecord>& log, const std::string& path,
                     OutputFormat format) {
  if (format == OutputFormat::Csv) {
    auto out = open_out(path);
    write_row(out, {"round", "agent", "decided_at", "lead_time"});
    for (const AllocationRecord& r : log) {
      write_row(out, {std::to_string(r.round), std::to_string(r.agent), std::to_string(r.decided_at),
                      std::to_string(r.lead_time)});
    }
    return;
  }
  json rows = json::array();
  for (const AllocationRecord& r : log) {
    rows.push_back({{"round", r.round},
                    {"agent", r.agent},
                    {"decided_at", r.decided_at},
                    {"lead_time", r.lead_time}});
  }
  open_out(path) << rows.dump(1) << '\n';
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file '" + path + "'");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace etsim
