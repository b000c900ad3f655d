#include <set>

#include "mocalc/solvers.hpp"

namespace mocalc {

namespace {

using nlohmann::json;

const std::set<std::string> kRequestKeys = {"solver", "route",  "orders", "coefficients", "forcing", "constant",
                                            "grid",   "grid_y", "kappa",  "c_eta",        "c_tau",   "config"};
const std::set<std::string> kConfigKeys = {"rel_tol",         "abs_tol",          "max_refinements",
                                           "fd_step_scale",   "fd_order",         "nodes_per_panel",
                                           "geometric_panels", "uniform_panels"};

void reject_unknown(const json& obj, const std::set<std::string>& known, const char* where) {
  for (const auto& [key, _] : obj.items())
    if (!known.count(key)) throw Error(ErrorKind::MalformedInput, std::string("unknown key '") + key + "' in " + where);
}

// Matcore document, or a bare number as a 1x1 matrix.
ComplexMatrix matrix(const json& doc) {
  if (doc.is_number()) return ComplexMatrix::Constant(1, 1, doc.get<double>());
  return matrix_from_json(doc);
}

std::vector<ComplexMatrix> matrices(const json& doc, const char* what) {
  if (!doc.is_array()) throw Error(ErrorKind::MalformedInput, std::string(what) + " must be an array of matrices");
  std::vector<ComplexMatrix> out;
  for (const auto& m : doc) out.push_back(matrix(m));
  return out;
}

template <class T>
T number(const json& doc, const char* key) {
  if (!doc.is_number()) throw Error(ErrorKind::MalformedInput, std::string(key) + " must be a number");
  if constexpr (std::is_integral_v<T>) {
    if (!doc.is_number_integer()) throw Error(ErrorKind::MalformedInput, std::string(key) + " must be an integer");
  }
  return doc.get<T>();
}

OperatorConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorKind::MalformedInput, "config must be an object");
  reject_unknown(doc, kConfigKeys, "config");
  OperatorConfig cfg;
  if (doc.contains("rel_tol")) cfg.quad.rel_tol = number<double>(doc["rel_tol"], "rel_tol");
  if (doc.contains("abs_tol")) cfg.quad.abs_tol = number<double>(doc["abs_tol"], "abs_tol");
  if (doc.contains("max_refinements")) cfg.quad.max_refinements = number<int>(doc["max_refinements"], "max_refinements");
  if (doc.contains("fd_step_scale")) cfg.fd_step_scale = number<double>(doc["fd_step_scale"], "fd_step_scale");
  if (doc.contains("fd_order")) cfg.fd_order = number<int>(doc["fd_order"], "fd_order");
  if (doc.contains("nodes_per_panel"))
    cfg.sampling.nodes_per_panel = number<int>(doc["nodes_per_panel"], "nodes_per_panel");
  if (doc.contains("geometric_panels"))
    cfg.sampling.geometric_panels = number<int>(doc["geometric_panels"], "geometric_panels");
  if (doc.contains("uniform_panels"))
    cfg.sampling.uniform_panels = number<int>(doc["uniform_panels"], "uniform_panels");
  return cfg;
}

json config_to_json(const OperatorConfig& cfg) {
  return {{"rel_tol", cfg.quad.rel_tol},
          {"abs_tol", cfg.quad.abs_tol},
          {"max_refinements", cfg.quad.max_refinements},
          {"fd_step_scale", cfg.fd_step_scale},
          {"fd_order", cfg.fd_order},
          {"nodes_per_panel", cfg.sampling.nodes_per_panel},
          {"geometric_panels", cfg.sampling.geometric_panels},
          {"uniform_panels", cfg.sampling.uniform_panels}};
}

}  // namespace

std::vector<double> grid_from_json(const json& doc) {
  std::vector<double> out;
  if (doc.is_array()) {
    for (const auto& v : doc) out.push_back(number<double>(v, "grid point"));
    return out;
  }
  if (!doc.is_object()) throw Error(ErrorKind::MalformedInput, "grid must be a list or {start, stop, count}");
  reject_unknown(doc, {"start", "stop", "count"}, "grid");
  for (const char* k : {"start", "stop", "count"})
    if (!doc.contains(k)) throw Error(ErrorKind::MalformedInput, std::string("grid is missing '") + k + "'");
  const double start = number<double>(doc["start"], "start");
  const double stop = number<double>(doc["stop"], "stop");
  const long long count = number<long long>(doc["count"], "count");
  if (count < 1 || count > 1000000) throw Error(ErrorKind::MalformedInput, "grid count must lie in [1, 1e6]");
  if (count == 1) return {start};
  for (long long i = 0; i < count; ++i)
    out.push_back(i == count - 1 ? stop : start + (stop - start) * static_cast<double>(i) / static_cast<double>(count - 1));
  return out;
}

SolveRequest request_from_json(const json& doc) {
  try {
    if (!doc.is_object()) throw Error(ErrorKind::MalformedInput, "request must be a JSON object");
    reject_unknown(doc, kRequestKeys, "request");
    if (!doc.contains("solver") || !doc["solver"].is_string())
      throw Error(ErrorKind::MalformedInput, "request needs a string 'solver'");
    SolveRequest req;
    req.solver = solver_kind_from_string(doc["solver"].get<std::string>());
    if (doc.contains("route")) {
      if (!doc["route"].is_string()) throw Error(ErrorKind::MalformedInput, "route must be a string");
      req.route = route_from_string(doc["route"].get<std::string>());
    }
    if (!doc.contains("orders")) throw Error(ErrorKind::MalformedInput, "request needs 'orders'");
    req.orders = matrices(doc["orders"], "orders");
    if (doc.contains("coefficients")) req.coefficients = matrices(doc["coefficients"], "coefficients");
    if (doc.contains("forcing")) req.forcing = matrix_function_from_json(doc["forcing"]);
    if (doc.contains("constant")) req.constant = matrix(doc["constant"]);
    if (!doc.contains("grid")) throw Error(ErrorKind::MalformedInput, "request needs 'grid'");
    req.grid = grid_from_json(doc["grid"]);
    if (doc.contains("grid_y")) req.grid_y = grid_from_json(doc["grid_y"]);
    if (doc.contains("kappa")) req.kappa = matrix(doc["kappa"]);
    if (doc.contains("c_eta")) req.c_eta = matrix(doc["c_eta"]);
    if (doc.contains("c_tau")) req.c_tau = matrix(doc["c_tau"]);
    if (doc.contains("config")) req.cfg = config_from_json(doc["config"]);
    return req;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MalformedInput, e.what());
  }
}

json request_to_json(const SolveRequest& req) {
  json doc;
  doc["solver"] = to_string(req.solver);
  doc["route"] = to_string(req.route);
  doc["orders"] = json::array();
  for (const auto& m : req.orders) doc["orders"].push_back(matrix_to_json(m));
  if (!req.coefficients.empty()) {
    doc["coefficients"] = json::array();
    for (const auto& c : req.coefficients) doc["coefficients"].push_back(matrix_to_json(c));
  }
  if (req.forcing) doc["forcing"] = matrix_function_to_json(*req.forcing);
  if (req.constant) doc["constant"] = matrix_to_json(*req.constant);
  doc["grid"] = req.grid;
  if (!req.grid_y.empty()) doc["grid_y"] = req.grid_y;
  if (req.kappa) doc["kappa"] = matrix_to_json(*req.kappa);
  if (req.c_eta) doc["c_eta"] = matrix_to_json(*req.c_eta);
  if (req.c_tau) doc["c_tau"] = matrix_to_json(*req.c_tau);
  doc["config"] = config_to_json(req.cfg);
  return doc;
}

}  // namespace mocalc
