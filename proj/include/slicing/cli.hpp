#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "slicing/construction.hpp"

namespace slicing::cli {

enum ExitCode : int { kOk = 0, kContractViolation = 1, kUsage = 2 };

struct RunConfig {
  std::string command;
  ConstructionParams params;
  std::vector<int> grid_n{6, 8, 10, 12};
  std::vector<int> grid_k{1, 2};
  // Sweep cells use N = ceil(c n^{k/2+4}) unless a fixed point count is given.
  std::optional<double> point_constant = 1.0 / 64.0;
  // verify-lemmas grid: n in [2, lemma_n_max], k in [1, min(lemma_k_max, n-1)].
  int lemma_n_max = 16;
  int lemma_k_max = 4;
  std::uint64_t lemma_trials = 100000;
  std::string in;
  std::string out = "-";
  std::string format = "json";
  int verbosity = 0;
  bool corrupt_tolerance = false;

  nlohmann::json resolved() const;
};

// Entry point shared by the executable and the tests. Output files go where
// --out says ("-" is `out`); diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Lemma suite; the returned document has one entry per check under "checks".
nlohmann::json verify_lemmas(const RunConfig& config);

}  // namespace slicing::cli
