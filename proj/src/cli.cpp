#include "slicing/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "slicing/density.hpp"
#include "slicing/errors.hpp"
#include "slicing/geometry.hpp"
#include "slicing/serialize.hpp"
#include "slicing/specialfn.hpp"

namespace slicing::cli {

using nlohmann::json;

json RunConfig::resolved() const {
  json j = to_json(params);
  j["command"] = command;
  j["format"] = format;
  j["out"] = out;
  if (command == "sweep") {
    j["grid_n"] = grid_n;
    j["grid_k"] = grid_k;
    j["point_constant"] = point_constant ? nlohmann::json(*point_constant) : nlohmann::json(nullptr);
  }
  if (command == "verify-lemmas") {
    j["lemma_n_max"] = lemma_n_max;
    j["lemma_k_max"] = lemma_k_max;
    j["lemma_trials"] = lemma_trials;
    j["corrupt_tolerance"] = corrupt_tolerance;
  }
  if (command == "search") j["in"] = in;
  return j;
}

namespace {

enum LemmaStream : std::uint64_t {
  kGammaStream = 11,
  kMcStream = 12,
  kBisphericalStream = 13,
  kChernoffStream = 14,
  kTailStream = 15,
  kLipschitzStream = 16,
};

json check(const std::string& name, bool pass, json detail) {
  return {{"name", name}, {"pass", pass}, {"detail", std::move(detail)}};
}

json gamma_check(const RunConfig& c) {
  Rng rng = make_rng(c.params.master_seed, kGammaStream);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double worst = std::numeric_limits<double>::infinity();
  double worst_lambda = 0.0;
  double worst_mu = 0.0;
  constexpr int kPairs = 10000;
  for (int i = 0; i < kPairs; ++i) {
    const double lambda = 100.0 * (1.0 - unif(rng));
    const double mu = lambda * unif(rng);
    const double m = gamma_inequality_margin(lambda, mu);
    if (m < worst) {
      worst = m;
      worst_lambda = lambda;
      worst_mu = mu;
    }
  }
  const double floor = c.corrupt_tolerance ? 1.0 : -1e-10;
  return check("gamma_inequality", worst >= floor,
               {{"pairs", kPairs}, {"min_margin", worst}, {"at_lambda", worst_lambda},
                {"at_mu", worst_mu}, {"floor", floor}});
}

json expectation_exact_check(const RunConfig& c) {
  json cells = json::array();
  bool pass = true;
  double worst_ratio = 0.0;
  for (int n = 2; n <= c.lemma_n_max; ++n) {
    for (int k = 1; k <= std::min(c.lemma_k_max, n - 1); ++k) {
      const double e = expectation_integral(n, k, 1.0);
      double bound = std::pow(static_cast<double>(n), -0.5 * k);
      if (c.corrupt_tolerance) bound *= 1e-6;
      const bool ok = e <= bound + 1e-10;
      pass = pass && ok;
      worst_ratio = std::max(worst_ratio, e / bound);
      cells.push_back({{"n", n}, {"k", k}, {"expectation", e}, {"bound", bound}, {"pass", ok}});
    }
  }
  return check("expectation_lemma_exact", pass, {{"max_ratio", worst_ratio}, {"cells", cells}});
}

json expectation_mc_check(const RunConfig& c) {
  json cells = json::array();
  bool pass = true;
  const std::uint64_t seed = derive_seed(c.params.master_seed, kMcStream);
  for (int n = 2; n <= std::min(10, c.lemma_n_max); ++n) {
    for (int k = 1; k <= std::min(c.lemma_k_max, n - 1); ++k) {
      Rng rng = make_rng(seed, static_cast<std::uint64_t>(n) * 64 + k);
      const Subspace F = sample_grassmannian(n, k, rng);
      const Moments m = accumulate(ChunkPlan{next_seed(rng), c.lemma_trials, 64}, [&](Rng& r) {
        const double d = distance_to_subspace(F, n * sample_sphere(n, r));
        return std::exp(-d * d);
      });
      const double exact = expectation_integral(n, k, 1.0);
      const double z = (m.mean() - exact) / std::max(m.std_error(), 1e-300);
      const double limit = c.corrupt_tolerance ? 0.0 : 4.0;
      const bool ok = std::abs(z) <= limit;
      pass = pass && ok;
      cells.push_back({{"n", n}, {"k", k}, {"mc_mean", m.mean()}, {"std_error", m.std_error()},
                       {"exact", exact}, {"z", z}, {"pass", ok}});
    }
  }
  return check("expectation_lemma_monte_carlo", pass,
               {{"trials", c.lemma_trials}, {"cells", cells}});
}

json bispherical_check(const RunConfig& c) {
  Rng rng = make_rng(c.params.master_seed, kBisphericalStream);
  json cells = json::array();
  bool pass = true;
  const double rel_tol = c.corrupt_tolerance ? 0.0 : 1e-6;
  for (int n = 3; n <= std::min(8, c.lemma_n_max); ++n) {
    for (int m = 1; m <= n - 1; ++m) {
      const double got =
          bispherical_integrate(n, m, n - m, [](const Eigen::VectorXd&) { return 1.0; }, rng);
      const double want = sphere_surface(n);
      const double rel = std::abs(got - want) / want;
      const bool ok = rel <= rel_tol;
      pass = pass && ok;
      cells.push_back({{"n", n}, {"m", m}, {"k", n - m}, {"integral", got}, {"kappa_n", want},
                       {"rel_error", rel}, {"pass", ok}});
    }
  }
  // The expectation identity: with the first factor carrying the k normal
  // coordinates, the integrand only depends on the angle.
  json cross = json::array();
  for (int n = 3; n <= std::min(8, c.lemma_n_max); ++n) {
    for (int k = 1; k <= std::min(c.lemma_k_max, n - 1); ++k) {
      const double nn = static_cast<double>(n) * n;
      const double got = bispherical_integrate(
                             n, k, n - k,
                             [&](const Eigen::VectorXd& v) {
                               return std::exp(-nn * v.head(k).squaredNorm());
                             },
                             rng) /
                         sphere_surface(n);
      const double want = expectation_integral(n, k, 1.0);
      const double rel = std::abs(got - want) / want;
      const bool ok = rel <= (c.corrupt_tolerance ? 0.0 : 1e-8);
      pass = pass && ok;
      cross.push_back({{"n", n}, {"k", k}, {"bispherical", got}, {"expectation", want},
                       {"rel_error", rel}, {"pass", ok}});
    }
  }
  return check("bispherical_identity", pass, {{"surface", cells}, {"expectation", cross}});
}

json chernoff_lemma_check(const RunConfig& c) {
  Rng rng = make_rng(c.params.master_seed, kChernoffStream);
  constexpr double p = 0.05;
  constexpr int N = 40;
  const auto res = chernoff_check(p, N, c.lemma_trials, rng, [](Rng& r) {
    return std::bernoulli_distribution(p)(r) ? 1.0 : 0.0;
  });
  const double bound = c.corrupt_tolerance ? 0.0 : res.bound;
  const bool ok = res.tail.estimate <= bound + 3.0 * res.tail.std_error;
  return check("chernoff", ok,
               {{"p", p}, {"N", N}, {"batches", c.lemma_trials}, {"empirical", res.tail.estimate},
                {"std_error", res.tail.std_error}, {"bound", res.bound}});
}

json tail_check(const RunConfig& c) {
  Rng rng = make_rng(c.params.master_seed, kTailStream);
  json cells = json::array();
  bool pass = true;
  for (int n = 1; n <= 12; ++n) {
    const TailCheck t = gaussian_tail_check(n, rng, c.lemma_trials);
    const double bound = c.corrupt_tolerance ? 0.0 : t.bound;
    const bool ok = t.tail.estimate <= bound;
    pass = pass && ok;
    cells.push_back({{"n", n}, {"estimate", t.tail.estimate}, {"std_error", t.tail.std_error},
                     {"bound", t.bound}, {"pass", ok}});
  }
  return check("gaussian_tail", pass, {{"trials", c.lemma_trials}, {"cells", cells}});
}

json lipschitz_check(const RunConfig& c) {
  Rng rng = make_rng(c.params.master_seed, kLipschitzStream);
  constexpr int kTriples = 10000;
  std::uniform_int_distribution<int> pick_n(2, 16);
  int violations = 0;
  double worst_excess = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < kTriples; ++i) {
    const int n = pick_n(rng);
    const int k = std::uniform_int_distribution<int>(1, n - 1)(rng);
    const Subspace f1 = sample_grassmannian(n, k, rng);
    const Subspace f2 = sample_grassmannian(n, k, rng);
    const Eigen::VectorXd theta = sample_sphere(n, rng);
    const double lhs = std::abs(distance_to_subspace(f1, theta) - distance_to_subspace(f2, theta));
    const double excess = lhs - projection_metric(f1, f2);
    worst_excess = std::max(worst_excess, excess);
    if (excess > (c.corrupt_tolerance ? -1.0 : 1e-12)) ++violations;
  }
  return check("lipschitz", violations == 0,
               {{"triples", kTriples}, {"violations", violations}, {"max_excess", worst_excess}});
}

}  // namespace

json verify_lemmas(const RunConfig& config) {
  json checks = json::array();
  checks.push_back(gamma_check(config));
  checks.push_back(expectation_exact_check(config));
  checks.push_back(expectation_mc_check(config));
  checks.push_back(bispherical_check(config));
  checks.push_back(chernoff_lemma_check(config));
  checks.push_back(tail_check(config));
  checks.push_back(lipschitz_check(config));
  bool all = true;
  for (const auto& c : checks) all = all && c.at("pass").get<bool>();
  return {{"schema", kLemmaSchema},
          {"build_id", build_id()},
          {"config", config.resolved()},
          {"seed", config.params.master_seed},
          {"all_pass", all},
          {"checks", checks}};
}

namespace {

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoi(item));
  }
  return out;
}

struct Flags {
  std::optional<std::string> config;
  std::optional<int> n, k, points, restarts, steps;
  std::optional<double> delta;
  std::optional<std::uint64_t> trials, seed, net_probes, candidate_budget;
  std::optional<std::string> out, format, in, grid_n, grid_k;
  bool corrupt = false;
  int verbosity = 0;
};

// File values first, then flags on top.
RunConfig resolve(const std::string& command, const Flags& f) {
  RunConfig c;
  c.command = command;
  if (command == "sweep") {
    c.format = "csv";
    c.params.mc_trials = 10000;
    c.params.net_budget = 4096;
  }
  if (command == "verify-lemmas") c.lemma_trials = 100000;
  if (f.config) {
    std::ifstream in(*f.config);
    if (!in) throw std::invalid_argument("cannot open config file " + *f.config);
    const json j = json::parse(in);
    c.params = params_from_json(j);
    if (command == "sweep") {
      if (j.contains("points")) c.point_constant.reset();
      if (j.contains("point_constant")) c.point_constant = j.at("point_constant").get<double>();
      if (!j.contains("trials")) c.params.mc_trials = 10000;
      if (!j.contains("net_budget")) c.params.net_budget = 4096;
    }
    if (j.contains("grid_n")) c.grid_n = j.at("grid_n").get<std::vector<int>>();
    if (j.contains("grid_k")) c.grid_k = j.at("grid_k").get<std::vector<int>>();
    if (command == "verify-lemmas") {
      c.lemma_n_max = j.value("n", c.lemma_n_max);
      c.lemma_k_max = j.value("k", c.lemma_k_max);
      c.lemma_trials = j.value("trials", c.lemma_trials);
    }
    c.out = j.value("out", c.out);
    c.format = j.value("format", c.format);
    c.in = j.value("in", c.in);
  }
  if (command == "verify-lemmas") {
    if (f.n) c.lemma_n_max = *f.n;
    if (f.k) c.lemma_k_max = *f.k;
    if (f.trials) c.lemma_trials = *f.trials;
  } else {
    if (f.n) c.params.n = *f.n;
    if (f.k) c.params.k = *f.k;
    if (f.trials) c.params.mc_trials = *f.trials;
  }
  if (f.points) {
    c.params.points = *f.points;
    c.point_constant.reset();
  }
  if (f.delta) c.params.delta = *f.delta;
  if (f.restarts) c.params.search_restarts = *f.restarts;
  if (f.steps) c.params.search_steps = *f.steps;
  if (f.seed) c.params.master_seed = *f.seed;
  if (f.net_probes) c.params.net_probes = *f.net_probes;
  if (f.candidate_budget) c.params.candidate_budget = *f.candidate_budget;
  if (f.out) c.out = *f.out;
  if (f.format) c.format = *f.format;
  if (f.in) c.in = *f.in;
  if (f.grid_n) c.grid_n = parse_int_list(*f.grid_n);
  if (f.grid_k) c.grid_k = parse_int_list(*f.grid_k);
  c.corrupt_tolerance = f.corrupt;
  c.verbosity = f.verbosity;
  if (c.format != "json" && c.format != "csv") {
    throw std::invalid_argument("--format must be json or csv");
  }
  return c;
}

void emit(const RunConfig& c, const std::string& text, std::ostream& out) {
  if (c.out == "-") {
    out << text;
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + c.out);
  f << text;
  if (!f) throw std::runtime_error("write failed for " + c.out);
}

std::string csv_preamble(const RunConfig& c, const char* schema) {
  std::ostringstream os;
  os << "# schema: " << schema << '\n'
     << "# build_id: " << build_id() << '\n'
     << "# seed: " << c.params.master_seed << '\n'
     << "# config: " << c.resolved().dump() << '\n';
  return os.str();
}

SweepRow row_from_report(const ConstructionReport& r) {
  SweepRow row;
  row.n = r.params.n;
  row.k = r.params.k;
  row.points = r.params.points;
  row.delta = r.delta;
  row.sup_over_net = r.good.sup_over_net;
  row.vol_est = r.norm->volume_k0.volume;
  row.mass3 = r.norm->mass3.estimate;
  row.max_section = r.search->value;
  row.certificate = r.certificate;
  row.seed = r.params.master_seed;
  return row;
}

int cmd_verify(const RunConfig& c, std::ostream& out, std::ostream& err) {
  if (c.lemma_n_max < 2 || c.lemma_k_max < 1) throw DomainError("verify-lemmas: need n >= 2, k >= 1");
  if (c.lemma_trials < 10000) throw DomainError("verify-lemmas: need at least 10^4 trials");
  const json report = verify_lemmas(c);
  emit(c, report.dump(2) + "\n", out);
  for (const auto& ch : report.at("checks")) {
    if (!ch.at("pass").get<bool>()) err << "check failed: " << ch.at("name").get<std::string>() << '\n';
  }
  return report.at("all_pass").get<bool>() ? kOk : kContractViolation;
}

int cmd_build(const RunConfig& c, std::ostream& out, std::ostream& err) {
  c.params.validate();
  try {
    const ConstructionReport rep = run_construction(c.params);
    if (c.format == "csv") {
      std::ostringstream os;
      os << csv_preamble(c, kSweepSchema);
      write_sweep_csv(os, {row_from_report(rep)});
      emit(c, os.str(), out);
    } else {
      json j = to_json(rep);
      j["config"] = c.resolved();
      emit(c, j.dump(2) + "\n", out);
    }
    return kOk;
  } catch (const ConstructionError& e) {
    err << "stage '" << e.stage() << "' failed: " << e.what() << '\n';
    const json j = {{"schema", kReportSchema}, {"build_id", build_id()}, {"status", "failed"},
                    {"stage", e.stage()},      {"message", e.what()},   {"config", c.resolved()},
                    {"seed", c.params.master_seed}};
    if (c.format == "json") emit(c, j.dump(2) + "\n", out);
    return kContractViolation;
  }
}

int cmd_sweep(const RunConfig& c, std::ostream& out, std::ostream& err) {
  for (int n : c.grid_n) {
    if (n < 2 || n > kMaxDimension) throw DomainError("sweep: grid n outside [2, 14]");
  }
  for (int k : c.grid_k) {
    if (k < 1) throw DomainError("sweep: grid k must be >= 1");
  }
  if (c.point_constant && !(*c.point_constant > 0.0)) {
    throw DomainError("sweep: point_constant must be positive");
  }
  const auto rows = run_sweep(c.grid_n, c.grid_k, c.params, c.point_constant);
  if (c.format == "csv") {
    std::ostringstream os;
    os << csv_preamble(c, kSweepSchema);
    write_sweep_csv(os, rows);
    emit(c, os.str(), out);
  } else {
    json arr = json::array();
    for (const auto& r : rows) arr.push_back(to_json(r));
    const json j = {{"schema", kSweepSchema}, {"build_id", build_id()}, {"config", c.resolved()},
                    {"seed", c.params.master_seed}, {"rows", arr}};
    emit(c, j.dump(2) + "\n", out);
  }
  for (const auto& r : rows) {
    if (r.status != "ok") err << "cell n=" << r.n << " k=" << r.k << ": " << r.status << '\n';
  }
  return kOk;
}

int cmd_search(RunConfig c, const Flags& f, std::ostream& out) {
  if (c.in.empty()) throw std::invalid_argument("search needs --in <report.json>");
  std::ifstream in(c.in);
  if (!in) throw std::invalid_argument("cannot open " + c.in);
  const json rep = json::parse(in);
  if (rep.value("schema", "") != kReportSchema || rep.value("status", "") != "ok") {
    throw std::invalid_argument(c.in + " is not a successful construction report");
  }
  const ConstructionParams saved = params_from_json(rep.at("config"));
  c.params.n = saved.n;
  c.params.k = saved.k;
  c.params.points = saved.points;
  if (!f.restarts) c.params.search_restarts = saved.search_restarts;
  if (!f.steps) c.params.search_steps = saved.search_steps;
  if (!f.seed) c.params.master_seed = saved.master_seed;

  const auto& rows = rep.at("points");
  Eigen::MatrixXd pts(static_cast<Eigen::Index>(rows.size()), saved.n);
  for (Eigen::Index i = 0; i < pts.rows(); ++i)
    for (Eigen::Index j = 0; j < pts.cols(); ++j)
      pts(i, j) = rows.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(j)).get<double>();
  const Construction cons = build_construction(saved.n, pts);
  const NormalizedDensity f0{std::make_shared<const GaussianMixture>(cons.density),
                             rep.at("normalization").at("scale_a").get<double>(),
                             rep.at("normalization").at("mass3").get<double>()};
  Rng rng = make_rng(c.params.master_seed, 4);
  const SearchResult res = max_section_search([&](const Subspace& F) { return f0.section(F); },
                                              saved.n, saved.k, c.params.search_restarts,
                                              c.params.search_steps, rng);
  const json j = {{"schema", kSearchSchema},
                  {"build_id", build_id()},
                  {"config", c.resolved()},
                  {"seed", c.params.master_seed},
                  {"max_section", {{"value", res.value},
                                   {"argmax", to_json(res.best)},
                                   {"trace_length", res.trace.size()}}},
                  {"dovr_lower_modulo_c", dovr_certificate(std::min(res.value, 1.0), saved.k)}};
  emit(c, j.dump(2) + "\n", out);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Constructs a convex body and density with uniformly small codim-k sections"};
  app.require_subcommand(1);
  Flags f;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", f.config, "JSON config file; flags override its values");
    sub->add_option("--n", f.n, "Ambient dimension (verify-lemmas: largest n of the grid)");
    sub->add_option("--k", f.k, "Codimension (verify-lemmas: largest k of the grid)");
    sub->add_option("--points", f.points, "Number N of sphere points");
    sub->add_option("--delta", f.delta, "Net radius");
    sub->add_option("--trials", f.trials, "Monte Carlo trials per estimate");
    sub->add_option("--restarts", f.restarts, "Max-section search restarts");
    sub->add_option("--steps", f.steps, "Hill-climbing steps per restart");
    sub->add_option("--net-probes", f.net_probes, "Random probes for the net certificate");
    sub->add_option("--candidate-budget", f.candidate_budget,
                    "Consecutive rejected candidates that end net packing");
    sub->add_option("--seed", f.seed, "Master seed");
    sub->add_option("--out", f.out, "Output path, '-' for stdout");
    sub->add_option("--format", f.format, "json or csv");
    sub->add_flag("-v,--verbose", f.verbosity, "More diagnostics");
  };

  auto* verify = app.add_subcommand("verify-lemmas", "Run the lemma verification suite");
  add_common(verify);
  verify->add_flag("--corrupt-tolerance", f.corrupt, "Testing hook: make every check fail")
      ->group("");
  auto* build = app.add_subcommand("build", "Build one construction and write its report");
  add_common(build);
  auto* sweep = app.add_subcommand("sweep", "Run constructions over a grid of (n, k)");
  add_common(sweep);
  sweep->add_option("--grid-n", f.grid_n, "Comma-separated n values");
  sweep->add_option("--grid-k", f.grid_k, "Comma-separated k values");
  auto* search = app.add_subcommand("search", "Max-section search on a saved build report");
  add_common(search);
  search->add_option("--in", f.in, "Report written by `build`")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kUsage;
  }

  CLI::App* active = app.get_subcommands().front();
  const std::string command = active->get_name();
  try {
    RunConfig c = resolve(command, f);
    if (command == "verify-lemmas") return cmd_verify(c, out, err);
    if (command == "build") return cmd_build(c, out, err);
    if (command == "sweep") return cmd_sweep(c, out, err);
    return cmd_search(c, f, out);
  } catch (const DomainError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const nlohmann::json::exception& e) {
    err << "usage error: bad JSON: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kContractViolation;
  }
}

}  // namespace slicing::cli
