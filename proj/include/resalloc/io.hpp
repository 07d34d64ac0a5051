#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "resalloc/certificate.hpp"
#include "resalloc/distributed.hpp"
#include "resalloc/graph.hpp"
#include "resalloc/oracle.hpp"
#include "resalloc/problem.hpp"
#include "resalloc/solver.hpp"
#include "resalloc/tracker.hpp"

namespace resalloc {

using Json = nlohmann::json;

// Node indices are 1-based in every file format and 0-based in memory.

Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& doc);

Json vec_to_json(const Vec& v);
Vec vec_from_json(const Json& j);
Json mat_to_json(const Mat& m);
Mat mat_from_json(const Json& j);

// {"nodes": N, "edges": [[i, j], ...]}
Json graph_to_json(const Graph& g);
Graph graph_from_json(const Json& j);

// Graph file for validate-weights: a graph plus either an explicit
// "weights" matrix or a "weight_strategy" name (default laplacian).
struct WeightSpec {
  Graph graph;
  std::optional<Mat> weights;
  WeightStrategy strategy = WeightStrategy::laplacian;

  Mat matrix() const;
};

WeightSpec weight_spec_from_json(const Json& j);
Json validation_to_json(const ValidationReport& r);
Json spectral_to_json(const SpectralSummary& s);

// Quadratic-cost problems with range constraints on every edge and optional
// per-node balls:
// {"graph": ..., "n": 2, "costs": [{"Q": [[..]] or scalar, "q": [..], "c": 0}],
//  "range": R | [R_e ...] | null, "v_max": [r | null ...],
//  "centers": [[..] ...], "x_tot": [..], "nu": .., "epsilon": ..}
ProblemInstance problem_from_json(const Json& j);

Json point_to_json(const StackedPoint& z);
StackedPoint point_from_json(const Json& j);

Json certificate_to_json(const Certificate& c);
Json kkt_to_json(const KKTResidual& r);
Json oracle_to_json(const OracleSolution& s);
Json original_to_json(const OriginalSolution& s);
Json stats_to_json(const MessageStats& s);

// Trace as JSON lines: one header line, then one line per snapshot.
std::string trace_to_jsonl(const Trace& t);
std::string message_log_to_jsonl(const std::vector<MessageLogEntry>& log);

Scenario scenario_from_json(const Json& j);
Json scenario_to_json(const Scenario& s);

Json log_to_json(const TrajectoryLog& log);
TrajectoryLog log_from_json(const Json& j);

// Writes robots.csv (k, robot_id, x1, x2, ...) and targets.csv (k, y1, ...)
// into `dir`, 12 significant digits. Robot ids are 1-based. Throws IoError.
void export_csv(const TrajectoryLog& log, const std::filesystem::path& dir);
// Writes trajectory.json into `dir`.
void export_json(const TrajectoryLog& log, const std::filesystem::path& dir);
TrajectoryLog import_json(const std::filesystem::path& file);

}  // namespace resalloc
