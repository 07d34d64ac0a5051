#include "resalloc/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "resalloc/errors.hpp"

namespace resalloc {

namespace fs = std::filesystem;

Json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const Json& doc) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

Json vec_to_json(const Vec& v) {
  Json j = Json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) j.push_back(v(k));
  return j;
}

Vec vec_from_json(const Json& j) {
  if (!j.is_array()) throw IoError("expected an array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) {
    if (!j[k].is_number()) throw IoError("expected a number");
    v(static_cast<Eigen::Index>(k)) = j[k].get<double>();
  }
  return v;
}

Json mat_to_json(const Mat& m) {
  Json j = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) j.push_back(vec_to_json(m.row(r)));
  return j;
}

Mat mat_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw IoError("expected a non-empty matrix");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    Vec row = vec_from_json(j[r]);
    if (row.size() != cols) throw IoError("ragged matrix rows");
    m.row(r) = row;
  }
  return m;
}

namespace {

template <typename T>
T field(const Json& j, const char* key) {
  if (!j.contains(key)) throw IoError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw IoError(std::string("field '") + key + "': " + e.what());
  }
}

const Json& object(const Json& j, const char* key) {
  if (!j.contains(key)) throw IoError(std::string("missing field '") + key + "'");
  return j.at(key);
}

std::vector<Vec> points_from_json(const Json& j) {
  if (!j.is_array()) throw IoError("expected a list of points");
  std::vector<Vec> out;
  for (const Json& p : j) out.push_back(vec_from_json(p));
  return out;
}

Json points_to_json(const std::vector<Vec>& pts) {
  Json j = Json::array();
  for (const Vec& p : pts) j.push_back(vec_to_json(p));
  return j;
}

Json optional_number(const std::optional<double>& v) {
  return v ? Json(*v) : Json(nullptr);
}

std::optional<double> optional_number(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace

Json graph_to_json(const Graph& g) {
  Json edges = Json::array();
  for (auto [a, b] : g.edges()) edges.push_back({a + 1, b + 1});
  return {{"nodes", g.node_count()}, {"edges", edges}};
}

Graph graph_from_json(const Json& j) {
  const int nodes = field<int>(j, "nodes");
  std::vector<Edge> edges;
  for (const Json& e : object(j, "edges")) {
    if (!e.is_array() || e.size() != 2) {
      throw IoError("edges must be pairs of 1-based node ids");
    }
    edges.emplace_back(e[0].get<int>() - 1, e[1].get<int>() - 1);
  }
  return Graph::build(nodes, edges);
}

Mat WeightSpec::matrix() const {
  if (weights) return *weights;
  return design_weights(graph, strategy).entries();
}

WeightSpec weight_spec_from_json(const Json& j) {
  const Json& g = j.contains("graph") ? j.at("graph") : j;
  WeightSpec spec{graph_from_json(g), std::nullopt, WeightStrategy::laplacian};
  if (j.contains("weights")) spec.weights = mat_from_json(j.at("weights"));
  if (j.contains("weight_strategy")) {
    spec.strategy =
        parse_weight_strategy(j.at("weight_strategy").get<std::string>());
  }
  return spec;
}

Json validation_to_json(const ValidationReport& r) {
  Json mismatches = Json::array();
  for (auto [a, b] : r.sparsity_mismatches) mismatches.push_back({a + 1, b + 1});
  return {{"ok", r.ok()},
          {"tolerance", r.tolerance},
          {"max_abs_row_sum", r.max_abs_row_sum},
          {"max_abs_col_sum", r.max_abs_col_sum},
          {"min_eig_shifted", r.min_eig_shifted},
          {"zero_sums_ok", r.zero_sums_ok},
          {"unique_zero_ok", r.unique_zero_ok},
          {"sparsity_ok", r.sparsity_ok},
          {"sparsity_mismatches", mismatches}};
}

Json spectral_to_json(const SpectralSummary& s) {
  return {{"lambda2", s.lambda2},
          {"lambda_max", s.lambda_max},
          {"sigma_max", s.sigma_max},
          {"symmetric", s.symmetric}};
}

ProblemInstance problem_from_json(const Json& j) {
  Graph g = graph_from_json(object(j, "graph"));
  const int n = field<int>(j, "n");
  const int nodes = g.node_count();

  const Json& cj = object(j, "costs");
  if (!cj.is_array() || static_cast<int>(cj.size()) != nodes) {
    throw IoError("costs needs one entry per node");
  }
  std::vector<NodeFunction> costs;
  for (const Json& c : cj) {
    QuadraticForm form;
    const Json& qm = object(c, "Q");
    form.Q = qm.is_number() ? Mat(qm.get<double>() * Mat::Identity(n, n))
                            : mat_from_json(qm);
    form.q = c.contains("q") ? vec_from_json(c.at("q")) : Vec(Vec::Zero(n));
    form.c = c.value("c", 0.0);
    if (form.Q.rows() != n || form.Q.cols() != n || form.q.size() != n) {
      throw IoError("cost dimensions do not match n");
    }
    costs.push_back(quadratic(std::move(form)));
  }

  std::vector<std::optional<EdgeFunction>> edge_fns(g.edge_count());
  if (j.contains("range") && !j.at("range").is_null()) {
    const Json& r = j.at("range");
    for (int e = 0; e < g.edge_count(); ++e) {
      const Json& re = r.is_array() ? r.at(e) : r;
      if (!re.is_null()) edge_fns[e] = distance_constraint(re.get<double>());
    }
  }

  std::vector<std::optional<NodeFunction>> node_fns(nodes);
  if (j.contains("v_max") && !j.at("v_max").is_null()) {
    const Json& v = j.at("v_max");
    if (!v.is_array() || static_cast<int>(v.size()) != nodes) {
      throw IoError("v_max needs one entry per node");
    }
    std::vector<Vec> centers(nodes, Vec::Zero(n));
    if (j.contains("centers")) centers = points_from_json(j.at("centers"));
    if (static_cast<int>(centers.size()) != nodes) {
      throw IoError("centers needs one point per node");
    }
    for (int i = 0; i < nodes; ++i) {
      if (!v[i].is_null()) node_fns[i] = ball_constraint(centers[i], v[i].get<double>());
    }
  }

  return ProblemInstance(std::move(g), n, std::move(costs), std::move(edge_fns),
                         std::move(node_fns), vec_from_json(object(j, "x_tot")),
                         field<double>(j, "nu"), field<double>(j, "epsilon"));
}

Json point_to_json(const StackedPoint& z) {
  return {{"x", vec_to_json(z.x)}, {"mu", vec_to_json(z.mu)}};
}

StackedPoint point_from_json(const Json& j) {
  return {vec_from_json(object(j, "x")), vec_from_json(object(j, "mu"))};
}

Json certificate_to_json(const Certificate& c) {
  return {{"phi", c.phi},
          {"f_phi", c.f_phi},
          {"f_phi_source", to_string(c.f_phi_source)},
          {"alpha", c.alpha},
          {"beta", c.beta},
          {"c_const", c.c_const},
          {"kappa", c.kappa},
          {"rate", c.rate},
          {"alpha_bound", c.alpha_bound},
          {"symmetric_path", c.symmetric_path},
          {"beta_condition", c.beta_condition},
          {"alpha_condition", c.alpha_condition},
          {"verdict", c.certified ? "certified" : "uncertified"},
          {"reasons", c.reasons}};
}

Json kkt_to_json(const KKTResidual& r) {
  return {{"stationarity", r.stationarity},
          {"dual_feas", r.dual_feas},
          {"primal_feas", r.primal_feas},
          {"complementarity", r.complementarity},
          {"nonneg", r.nonneg},
          {"max", r.max()}};
}

Json oracle_to_json(const OracleSolution& s) {
  Json j = {{"x_star", vec_to_json(s.x_star)},
            {"mu_star", vec_to_json(s.mu_star)},
            {"f_star", s.f_star},
            {"lagrangian_star", s.lagrangian_star},
            {"kkt", kkt_to_json(s.residual)},
            {"natural_residual", s.natural_residual},
            {"iterations", s.iterations}};
  j["x_opt"] = s.x_opt ? vec_to_json(*s.x_opt) : Json(nullptr);
  j["f_opt"] = optional_number(s.f_opt);
  return j;
}

Json original_to_json(const OriginalSolution& s) {
  Json j = {{"x_opt", vec_to_json(s.x_opt)},
            {"f_opt", s.f_opt},
            {"max_violation", s.max_violation}};
  if (s.grid) {
    j["grid"] = {{"x", vec_to_json(s.grid->x)},
                 {"f", s.grid->f},
                 {"pitch", s.grid->pitch},
                 {"evaluations", s.grid->evaluations}};
  }
  return j;
}

Json stats_to_json(const MessageStats& s) {
  return {{"rounds", s.rounds},
          {"messages_total", s.messages_total},
          {"scalars_transferred", s.scalars_transferred}};
}

std::string trace_to_jsonl(const Trace& t) {
  std::ostringstream os;
  Json header = {{"iterations", t.iterations},
                 {"termination", to_string(t.termination)},
                 {"message", t.message},
                 {"max_feasibility_residual", 0.0}};
  double worst = 0.0;
  for (double r : t.feasibility) worst = std::max(worst, r);
  header["max_feasibility_residual"] = worst;
  Json bt = Json::array();
  for (const BacktrackEvent& b : t.backtracks) {
    bt.push_back({{"tau", b.tau}, {"gamma", b.gamma}});
  }
  header["backtracks"] = bt;
  os << header.dump() << '\n';
  for (const Snapshot& s : t.snapshots) {
    Json line = {{"tau", s.tau},
                 {"feasibility_residual", s.feasibility_residual},
                 {"grad_x_norm", s.grad_x_norm},
                 {"grad_mu_norm", s.grad_mu_norm},
                 {"dist_to_reference", optional_number(s.dist_to_reference)}};
    if (s.z) line["z"] = point_to_json(*s.z);
    os << line.dump() << '\n';
  }
  return os.str();
}

std::string message_log_to_jsonl(const std::vector<MessageLogEntry>& log) {
  std::ostringstream os;
  for (const MessageLogEntry& e : log) {
    os << Json{{"round", e.round},
               {"from", e.from + 1},
               {"to", e.to + 1},
               {"phase", static_cast<int>(e.phase)},
               {"size", e.size}}
              .dump()
       << '\n';
  }
  return os.str();
}

Scenario scenario_from_json(const Json& j) {
  Scenario s;
  s.graph = graph_from_json(object(j, "graph"));
  s.q_weights = field<std::vector<double>>(j, "q_weights");
  s.range_r = field<double>(j, "range_r");
  s.v_max.assign(s.graph.node_count(), std::nullopt);
  if (j.contains("v_max") && !j.at("v_max").is_null()) {
    const Json& v = j.at("v_max");
    if (!v.is_array()) throw IoError("v_max must be a list");
    s.v_max.clear();
    for (const Json& e : v) {
      s.v_max.push_back(e.is_null() ? std::nullopt
                                    : std::optional<double>(e.get<double>()));
    }
  }

  const Json& path = object(j, "target_path");
  if (path.is_object() && path.contains("synthetic")) {
    s.target_path = synthetic_path(field<int>(path.at("synthetic"), "steps"));
  } else {
    s.target_path = points_from_json(path);
  }

  if (j.contains("initial_positions")) {
    const Json& ip = j.at("initial_positions");
    if (!(ip.is_string() && ip.get<std::string>() == "auto")) {
      s.initial_positions = points_from_json(ip);
    }
  }
  if (j.contains("solver")) {
    const Json& sv = j.at("solver");
    s.solver.nu = sv.value("nu", s.solver.nu);
    s.solver.epsilon = sv.value("epsilon", s.solver.epsilon);
    s.solver.alpha = sv.value("alpha", s.solver.alpha);
    s.solver.beta = sv.value("beta", s.solver.beta);
    s.solver.iters_per_step = sv.value("iters_per_step", s.solver.iters_per_step);
  }
  if (j.contains("weight_strategy")) {
    s.weight_strategy =
        parse_weight_strategy(j.at("weight_strategy").get<std::string>());
  }
  s.validate();
  return s;
}

Json scenario_to_json(const Scenario& s) {
  Json v = Json::array();
  for (const auto& e : s.v_max) v.push_back(optional_number(e));
  Json j = {{"graph", graph_to_json(s.graph)},
            {"q_weights", s.q_weights},
            {"range_r", s.range_r},
            {"v_max", v},
            {"target_path", points_to_json(s.target_path)},
            {"solver",
             {{"nu", s.solver.nu},
              {"epsilon", s.solver.epsilon},
              {"alpha", s.solver.alpha},
              {"beta", s.solver.beta},
              {"iters_per_step", s.solver.iters_per_step}}},
            {"weight_strategy", to_string(s.weight_strategy)}};
  j["initial_positions"] =
      s.initial_positions ? points_to_json(*s.initial_positions) : Json("auto");
  return j;
}

Json log_to_json(const TrajectoryLog& log) {
  Json steps = Json::array();
  for (const StepRecord& r : log.steps) {
    steps.push_back({{"k", r.k},
                     {"y", vec_to_json(r.y)},
                     {"x", points_to_json(r.x)},
                     {"barycenter_residual", r.barycenter_residual},
                     {"feasibility_residual", r.feasibility_residual},
                     {"max_edge_distance", r.max_edge_distance},
                     {"iterations", r.iterations},
                     {"oracle_deviation", optional_number(r.oracle_deviation)},
                     {"original_deviation",
                      optional_number(r.original_deviation)}});
  }
  return {{"mode", to_string(log.mode)},
          {"y0", vec_to_json(log.y0)},
          {"x0", points_to_json(log.x0)},
          {"steps", steps},
          {"summary",
           {{"max_oracle_deviation", optional_number(log.max_oracle_deviation)},
            {"max_original_deviation",
             optional_number(log.max_original_deviation)}}}};
}

TrajectoryLog log_from_json(const Json& j) {
  TrajectoryLog log;
  log.mode = parse_tracking_mode(field<std::string>(j, "mode"));
  log.y0 = vec_from_json(object(j, "y0"));
  log.x0 = points_from_json(object(j, "x0"));
  for (const Json& r : object(j, "steps")) {
    StepRecord rec;
    rec.k = field<int>(r, "k");
    rec.y = vec_from_json(object(r, "y"));
    rec.x = points_from_json(object(r, "x"));
    rec.barycenter_residual = field<double>(r, "barycenter_residual");
    rec.feasibility_residual = field<double>(r, "feasibility_residual");
    rec.max_edge_distance = field<double>(r, "max_edge_distance");
    rec.iterations = field<int>(r, "iterations");
    rec.oracle_deviation = optional_number(r, "oracle_deviation");
    rec.original_deviation = optional_number(r, "original_deviation");
    log.steps.push_back(std::move(rec));
  }
  if (j.contains("summary")) {
    const Json& s = j.at("summary");
    log.max_oracle_deviation = optional_number(s, "max_oracle_deviation");
    log.max_original_deviation = optional_number(s, "max_original_deviation");
  }
  return log;
}

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << std::setprecision(12);
  return out;
}

}  // namespace

void export_csv(const TrajectoryLog& log, const fs::path& dir) {
  if (log.steps.empty()) throw IoError("nothing to export: log is empty");
  ensure_dir(dir);
  const auto n = log.steps.front().y.size();

  std::ofstream robots = open_out(dir / "robots.csv");
  robots << "k,robot_id";
  for (Eigen::Index d = 0; d < n; ++d) robots << ",x" << d + 1;
  robots << '\n';
  for (const StepRecord& r : log.steps) {
    for (std::size_t i = 0; i < r.x.size(); ++i) {
      robots << r.k << ',' << i + 1;
      for (Eigen::Index d = 0; d < n; ++d) robots << ',' << r.x[i](d);
      robots << '\n';
    }
  }

  std::ofstream targets = open_out(dir / "targets.csv");
  targets << 'k';
  for (Eigen::Index d = 0; d < n; ++d) targets << ",y" << d + 1;
  targets << '\n';
  for (const StepRecord& r : log.steps) {
    targets << r.k;
    for (Eigen::Index d = 0; d < n; ++d) targets << ',' << r.y(d);
    targets << '\n';
  }
  if (!robots || !targets) throw IoError("write failed in " + dir.string());
}

void export_json(const TrajectoryLog& log, const fs::path& dir) {
  if (log.steps.empty()) throw IoError("nothing to export: log is empty");
  ensure_dir(dir);
  write_json(dir / "trajectory.json", log_to_json(log));
}

TrajectoryLog import_json(const fs::path& file) {
  return log_from_json(read_json(file));
}

}  // namespace resalloc
