#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "slicing/construction.hpp"
#include "slicing/density.hpp"
#include "slicing/geometry.hpp"
#include "slicing/polytope.hpp"

namespace slicing {

inline constexpr const char* kReportSchema = "slicing-report/1";
inline constexpr const char* kSweepSchema = "slicing-sweep/1";
inline constexpr const char* kLemmaSchema = "slicing-lemmas/1";
inline constexpr const char* kSearchSchema = "slicing-search/1";

// Identifier baked in at configure time (git describe).
const char* build_id();

nlohmann::json to_json(const Subspace& F);
Subspace subspace_from_json(const nlohmann::json& j);

nlohmann::json to_json(const GrassmannNet& net);
GrassmannNet net_from_json(const nlohmann::json& j);

nlohmann::json to_json(const GaussianMixture& f);
GaussianMixture mixture_from_json(const nlohmann::json& j);

nlohmann::json to_json(const VPolytope& P);
VPolytope polytope_from_json(const nlohmann::json& j);

nlohmann::json to_json(const VolumeEstimate& v);
nlohmann::json to_json(const McEstimate& e);
nlohmann::json to_json(const ConstructionParams& p);
ConstructionParams params_from_json(const nlohmann::json& j);

// Full record; timings live under "timing", everything else is a pure
// function of the parameters and seed.
nlohmann::json to_json(const ConstructionReport& r);

inline const std::vector<std::string>& sweep_columns() {
  static const std::vector<std::string> cols{"n",       "k",           "N",          "delta",
                                             "sup_over_net", "vol_est",  "mass3",
                                             "max_section",  "certificate", "seed", "status"};
  return cols;
}

// %.17g, so every double round-trips.
std::string format_double(double v);

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);
nlohmann::json to_json(const SweepRow& row);

}  // namespace slicing
