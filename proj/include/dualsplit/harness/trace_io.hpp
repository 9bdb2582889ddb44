#pragma once

#include <chrono>
#include <cstdio>
#include <fstream>
#include <string>

#include <json.hpp>

#include "dualsplit/numerics/errors.hpp"
#include "dualsplit/solvers/trace.hpp"

namespace dualsplit::harness {

/// Numbers are serialized with 17 significant digits so a replay can parse
/// back the exact double.
inline std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline constexpr const char* kTraceHeader =
    "seed,stage,dual_surrogate,primal_objective,obj_gap,primal_dist,"
    "consensus_res,ineq_violation,wall_time";

/// One trace row. The CSV body is deterministic except for the wall_time
/// column; run-level timestamps live in the companion metadata file.
struct TraceRow {
  std::uint64_t seed = 0;
  int stage = 0;
  double dual_surrogate = 0.0;
  bool dual_in_domain = true;
  double primal_objective = 0.0;
  double obj_gap = 0.0;
  double primal_dist = 0.0;
  double consensus_res = 0.0;
  double ineq_violation = 0.0;
  double wall_time = 0.0;
};

class TraceWriter {
 public:
  explicit TraceWriter(const std::string& path) : path_(path), out_(path) {
    if (!out_) throw ParseError("cannot open trace output " + path);
    out_ << kTraceHeader << "\n";
  }

  void write(const TraceRow& r) {
    out_ << r.seed << ',' << r.stage << ','
         << (r.dual_in_domain ? format_number(r.dual_surrogate) : std::string("out_of_domain"))
         << ',' << format_number(r.primal_objective) << ',' << format_number(r.obj_gap) << ','
         << format_number(r.primal_dist) << ',' << format_number(r.consensus_res) << ','
         << format_number(r.ineq_violation) << ',' << format_number(r.wall_time) << '\n';
  }

  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ofstream out_;
};

inline std::string metadata_path(const std::string& trace_path) {
  return trace_path + ".meta.json";
}

inline nlohmann::ordered_json adaptation_log(const solvers::SolverTrace& trace) {
  nlohmann::ordered_json events = nlohmann::ordered_json::array();
  for (const auto& ev : trace.adaptations) {
    nlohmann::ordered_json e;
    e["stage"] = ev.stage;
    e["lambda_change_sq"] = ev.lambda_change_sq;
    e["probs_after"] = ev.probs_after;
    events.push_back(std::move(e));
  }
  return events;
}

inline std::string timestamp_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

}  // namespace dualsplit::harness
