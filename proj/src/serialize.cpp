#include "slicing/serialize.hpp"

#include <cstdio>

#include "slicing/errors.hpp"

#ifndef SLICING_BUILD_ID
#define SLICING_BUILD_ID "unknown"
#endif

namespace slicing {

using nlohmann::json;

namespace {

json matrix_rows(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd rows_matrix(const json& rows, Eigen::Index cols) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const auto& row = rows.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw DomainError("json: row " + std::to_string(i) + " has the wrong length");
    }
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = row.at(static_cast<std::size_t>(j)).get<double>();
  }
  return m;
}

}  // namespace

const char* build_id() { return SLICING_BUILD_ID; }

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json to_json(const Subspace& F) {
  return {{"ambient_dim", F.ambient_dim()},
          {"codim", F.codim()},
          {"normal_frame", matrix_rows(F.normal_frame())}};
}

Subspace subspace_from_json(const json& j) {
  const int n = j.at("ambient_dim").get<int>();
  const int k = j.at("codim").get<int>();
  Eigen::MatrixXd frame = rows_matrix(j.at("normal_frame"), n);
  if (frame.rows() != k) throw DomainError("json: frame row count differs from codim");
  return Subspace::from_orthonormal(std::move(frame));
}

json to_json(const GrassmannNet& net) {
  json members = json::array();
  for (const auto& m : net.members) members.push_back(matrix_rows(m.normal_frame()));
  return {{"ambient_dim", net.ambient_dim}, {"codim", net.codim},
          {"delta", net.delta},             {"coverage_probes", net.coverage_probes},
          {"coverage_max_gap", net.coverage_max_gap}, {"members", members}};
}

GrassmannNet net_from_json(const json& j) {
  GrassmannNet net;
  net.ambient_dim = j.at("ambient_dim").get<int>();
  net.codim = j.at("codim").get<int>();
  net.delta = j.at("delta").get<double>();
  net.coverage_probes = j.at("coverage_probes").get<std::uint64_t>();
  net.coverage_max_gap = j.at("coverage_max_gap").get<double>();
  for (const auto& m : j.at("members")) {
    net.members.push_back(Subspace::from_orthonormal(rows_matrix(m, net.ambient_dim)));
  }
  if (net.members.empty()) throw DomainError("json: net has no members");
  return net;
}

json to_json(const GaussianMixture& f) {
  return {{"ambient_dim", f.ambient_dim()}, {"centers", matrix_rows(f.centers())}};
}

GaussianMixture mixture_from_json(const json& j) {
  return GaussianMixture(rows_matrix(j.at("centers"), j.at("ambient_dim").get<int>()));
}

json to_json(const VPolytope& P) {
  return {{"ambient_dim", P.ambient_dim()},
          {"circumradius", P.circumradius()},
          {"vertices", matrix_rows(P.vertices())}};
}

VPolytope polytope_from_json(const json& j) {
  return VPolytope(rows_matrix(j.at("vertices"), j.at("ambient_dim").get<int>()),
                   j.at("circumradius").get<double>());
}

json to_json(const VolumeEstimate& v) {
  return {{"estimate", v.volume}, {"std_error", v.std_error}, {"hits", v.hits},
          {"trials", v.trials},   {"ball_volume", v.ball_volume}};
}

json to_json(const McEstimate& e) {
  return {{"estimate", e.estimate}, {"std_error", e.std_error}, {"hits", e.hits},
          {"trials", e.trials}};
}

json to_json(const ConstructionParams& p) {
  return {{"n", p.n},
          {"k", p.k},
          {"points", p.points},
          {"delta", p.resolved_delta()},
          {"delta_is_default", !p.delta.has_value()},
          {"net_probes", p.net_probes},
          {"candidate_budget", p.candidate_budget},
          {"trials", p.mc_trials},
          {"restarts", p.search_restarts},
          {"steps", p.search_steps},
          {"seed", p.master_seed},
          {"beta", p.beta},
          {"point_retries", p.point_retries},
          {"net_budget", p.net_budget}};
}

ConstructionParams params_from_json(const json& j) {
  ConstructionParams p;
  p.n = j.value("n", p.n);
  p.k = j.value("k", p.k);
  p.points = j.value("points", p.points);
  if (j.contains("delta") && !j.value("delta_is_default", false)) p.delta = j.at("delta").get<double>();
  p.net_probes = j.value("net_probes", p.net_probes);
  p.candidate_budget = j.value("candidate_budget", p.candidate_budget);
  p.mc_trials = j.value("trials", p.mc_trials);
  p.search_restarts = j.value("restarts", p.search_restarts);
  p.search_steps = j.value("steps", p.search_steps);
  p.master_seed = j.value("seed", p.master_seed);
  p.beta = j.value("beta", p.beta);
  p.point_retries = j.value("point_retries", p.point_retries);
  p.net_budget = j.value("net_budget", p.net_budget);
  return p;
}

json to_json(const ConstructionReport& r) {
  json j;
  j["schema"] = kReportSchema;
  j["build_id"] = build_id();
  j["status"] = "ok";
  j["config"] = to_json(r.params);
  j["seed"] = r.params.master_seed;
  j["points"] = matrix_rows(r.good.points);
  j["net_summary"] = {{"delta", r.delta},
                      {"size", r.net_size},
                      {"coverage_probes", r.net_probes},
                      {"coverage_max_gap", r.net_max_gap}};
  j["sup_over_net"] = r.good.sup_over_net;
  j["target_threshold"] = r.good.threshold;
  j["extension"] = {{"bound", r.good.extension_bound},
                    {"probes", r.extension_probes},
                    {"probe_sup", r.extension_probe_sup}};
  j["point_attempts"] = r.good.attempts;
  if (r.norm) {
    const auto& nm = *r.norm;
    j["volume"] = to_json(nm.volume_k0);
    j["volume_3k0"] = to_json(nm.volume_3k0);
    j["volume_k"] = to_json(nm.volume_k);
    j["mass_3k0"] = to_json(nm.mass3);
    j["mass_ak"] = to_json(nm.mass_ak);
    j["normalization"] = {{"scale_a", nm.density.scale},
                          {"mass3", nm.density.mass3},
                          {"unit_mass", nm.unit_mass},
                          {"unit_mass_tolerance", nm.unit_mass_tolerance}};
  }
  j["gluskin_ratio"] = r.gluskin;
  if (r.search) {
    j["max_section"] = {{"value", r.search->value},
                        {"argmax", to_json(r.search->best)},
                        {"trace_length", r.search->trace.size()},
                        {"section_f0", r.section_f0_at_max},
                        {"phi_average_lemma", r.phi_lemma_at_max},
                        {"phi_average_section", r.phi_section_at_max},
                        {"f0_section_bound", r.section_bound}};
  }
  j["normalized_section_modulo_c"] = r.normalized_section;
  j["dovr_lower_modulo_c"] = r.certificate;
  j["timing"] = r.wall_seconds;
  return j;
}

json to_json(const SweepRow& row) {
  return {{"n", row.n},
          {"k", row.k},
          {"N", row.points},
          {"delta", row.delta},
          {"sup_over_net", row.sup_over_net},
          {"vol_est", row.vol_est},
          {"mass3", row.mass3},
          {"max_section", row.max_section},
          {"certificate", row.certificate},
          {"seed", row.seed},
          {"status", row.status}};
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  const auto& cols = sweep_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const auto& r : rows) {
    os << r.n << ',' << r.k << ',' << r.points << ',' << format_double(r.delta) << ','
       << format_double(r.sup_over_net) << ',' << format_double(r.vol_est) << ','
       << format_double(r.mass3) << ',' << format_double(r.max_section) << ','
       << format_double(r.certificate) << ',' << r.seed << ',' << r.status << '\n';
  }
}

}  // namespace slicing
