// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "slicing/cli.hpp"
#include "slicing/construction.hpp"
#include "slicing/density.hpp"
#include "slicing/geometry.hpp"
#include "slicing/polytope.hpp"
#include "slicing/serialize.hpp"
#include "slicing/specialfn.hpp"

namespace {

using namespace slicing;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Outcome expectation_exact() {
  double worst = 0.0;
  int cells = 0;
  bool pass = true;
  for (int n = 2; n <= 16; ++n) {
    for (int k = 1; k <= std::min(6, n - 1); ++k) {
      const double e = expectation_integral(n, k, 1.0);
      const double bound = std::pow(n, -0.5 * k);
      pass = pass && e <= bound + 1e-10;
      worst = std::max(worst, e / bound);
      ++cells;
    }
  }
  return {pass, fmt("%.0f cells, max E / n^{-k/2} = %.6f", cells, worst)};
}

Outcome expectation_stochastic() {
  double worst_z = 0.0;
  int cells = 0;
  for (int n = 2; n <= 10; ++n) {
    for (int k = 1; k <= std::min(6, n - 1); ++k) {
      Rng rng = make_rng(101, static_cast<std::uint64_t>(n) * 64 + k);
      const Subspace F = sample_grassmannian(n, k, rng);
      const Moments m = accumulate(ChunkPlan{next_seed(rng), 100000, 64}, [&](Rng& r) {
        const double d = distance_to_subspace(F, n * sample_sphere(n, r));
        return std::exp(-d * d);
      });
      const double z = std::abs(m.mean() - expectation_integral(n, k, 1.0)) / m.std_error();
      worst_z = std::max(worst_z, z);
      ++cells;
    }
  }
  return {worst_z <= 4.0, fmt("%.0f cells x 1e5 draws, max |z| = %.3f (limit 4)", cells, worst_z)};
}

// Subspace Monte Carlo: z drawn from the mixture's projection onto F, weighted
// by f(B^T z) / q(z). Independent of the closed form.
Outcome section_oracle() {
  Rng rng = make_rng(202, 0);
  double worst_z = 0.0;
  double worst_rel_exact = 0.0;
  bool pass = true;
  for (int inst = 0; inst < 20; ++inst) {
    const int n = std::uniform_int_distribution<int>(2, 10)(rng);
    const int k = std::uniform_int_distribution<int>(1, std::min(3, n - 1))(rng);
    const int half = std::uniform_int_distribution<int>(1, 16)(rng);
    Eigen::MatrixXd h(half, n);
    for (int i = 0; i < half; ++i) {
      const double r = std::uniform_real_distribution<double>(0.0, 2.0 * std::sqrt(n))(rng);
      h.row(i) = r * sample_sphere(n, rng).transpose();
    }
    const GaussianMixture f = GaussianMixture::symmetric_from(h);
    const Subspace F = sample_grassmannian(n, k, rng);
    const Eigen::MatrixXd B = F.basis();
    const Eigen::MatrixXd proj = f.centers() * B.transpose();  // M x (n-k)
    const int d = n - k;
    const double log_norm = -0.5 * d * std::log(2.0 * std::numbers::pi);
    const Moments m = accumulate(ChunkPlan{next_seed(rng), 1000000, 64}, [&](Rng& r) {
      const auto i = std::uniform_int_distribution<Eigen::Index>(0, f.size() - 1)(r);
      const Eigen::VectorXd z = proj.row(i).transpose() + standard_normal_vector(d, r);
      const Eigen::ArrayXd sq = (proj.rowwise() - z.transpose()).rowwise().squaredNorm().array();
      const double q = (log_norm + (-0.5 * sq)).exp().mean();
      return density_eval(f, B.transpose() * z) / q;
    });
    const double exact = section_integral(f, F);
    // With a single center pair the weight is constant and the estimator
    // exact, so the comparison allows rounding on top of 3 standard errors.
    const double diff = std::abs(m.mean() - exact);
    if (diff > 3.0 * m.std_error() + 1e-12 * exact) pass = false;
    if (m.std_error() > 1e-12 * exact) {
      worst_z = std::max(worst_z, diff / m.std_error());
    } else {
      worst_rel_exact = std::max(worst_rel_exact, diff / exact);
    }
  }
  return {pass, fmt("20 instances x 1e6 draws, max |z| = %.3f (limit 3), zero-variance "
                    "instances max relative error %.1e",
                    worst_z, worst_rel_exact)};
}

Outcome bispherical() {
  Rng rng = make_rng(303, 0);
  double worst = 0.0;
  for (int n = 3; n <= 8; ++n) {
    for (int m = 1; m <= n - 1; ++m) {
      const double v =
          bispherical_integrate(n, m, n - m, [](const Eigen::VectorXd&) { return 1.0; }, rng);
      worst = std::max(worst, std::abs(v / sphere_surface(n) - 1.0));
    }
  }
  return {worst <= 1e-6, fmt("n = 3..8, all splits, max relative error = %.3e", worst)};
}

Outcome gamma_inequality() {
  Rng rng = make_rng(404, 0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 10000; ++i) {
    const double lambda = 100.0 * (1.0 - u(rng));
    worst = std::min(worst, gamma_inequality_margin(lambda, lambda * u(rng)));
  }
  return {worst >= -1e-10, fmt("1e4 pairs, min margin = %.3e", worst)};
}

Outcome chernoff() {
  Rng rng = make_rng(505, 0);
  const auto r = chernoff_check(0.05, 40, 100000, rng, [](Rng& g) {
    return std::bernoulli_distribution(0.05)(g) ? 1.0 : 0.0;
  });
  return {r.tail.estimate <= r.bound + 3.0 * r.tail.std_error,
          fmt("P(avg >= 0.15) = %.5f +- %.5f, bound e^{-2} = %.5f", r.tail.estimate,
              r.tail.std_error, r.bound)};
}

Outcome lipschitz() {
  Rng rng = make_rng(606, 0);
  int violations = 0;
  double worst = -1.0;
  for (int t = 0; t < 10000; ++t) {
    const int n = std::uniform_int_distribution<int>(2, 16)(rng);
    const int k = std::uniform_int_distribution<int>(1, n - 1)(rng);
    const Subspace F1 = sample_grassmannian(n, k, rng);
    const Subspace F2 = sample_grassmannian(n, k, rng);
    const Eigen::VectorXd theta = sample_sphere(n, rng);
    const double excess =
        std::abs(distance_to_subspace(F1, theta) - distance_to_subspace(F2, theta)) -
        projection_metric(F1, F2);
    worst = std::max(worst, excess);
    if (excess > 0.0) ++violations;
  }
  return {violations == 0, fmt("1e4 triples, %.0f violations, max excess = %.3e", violations, worst)};
}

Outcome net_coverage() {
  struct Cell {
    int n, k;
    double delta;
  };
  std::string detail;
  bool pass = true;
  for (const Cell c : {Cell{4, 1, 0.4}, Cell{5, 2, 0.5}, Cell{6, 1, 0.5}}) {
    Rng rng = make_rng(707, static_cast<std::uint64_t>(c.n) * 64 + c.k);
    const GrassmannNet net = build_net(c.n, c.k, c.delta, rng, 10000, 1000);
    pass = pass && net.coverage_probes == 10000 && net.coverage_max_gap < c.delta;
    detail += fmt("(%.0f,%.0f,", c.n, c.k) + fmt("%.1f): ", c.delta) +
              std::to_string(net.members.size()) + " members, gap " +
              fmt("%.4f; ", net.coverage_max_gap);
  }
  return {pass, detail};
}

Outcome tail_and_mass() {
  Rng rng = make_rng(808, 0);
  double worst = 0.0;
  bool pass = true;
  for (int n = 1; n <= 12; ++n) {
    const TailCheck t = gaussian_tail_check(n, rng, 100000);
    worst = std::max(worst, t.tail.estimate);
    pass = pass && t.tail.estimate <= 0.25;
  }
  ConstructionParams p;
  p.n = 8;
  p.k = 1;
  p.points = 1 << 14;
  p.delta = 0.5;
  p.mc_trials = 10000;
  const ConstructionReport r = run_construction(p);
  const McEstimate& m = r.norm->mass3;
  pass = pass && m.estimate >= 0.75 - 3.0 * m.std_error;
  return {pass, fmt("max tail over n=1..12 = %.4f; build n=8,k=1,N=2^14: mass3 = %.4f +- %.4f",
                    worst, m.estimate, m.std_error)};
}

Outcome polytope_oracles() {
  Rng rng = make_rng(909, 0);
  double worst_z = 0.0;
  for (int n : {3, 4}) {
    Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(2 * n, n);
    for (int j = 0; j < n; ++j) {
      cross(2 * j, j) = 1.0;
      cross(2 * j + 1, j) = -1.0;
    }
    Eigen::MatrixXd cube(1 << n, n);
    for (int i = 0; i < (1 << n); ++i)
      for (int j = 0; j < n; ++j) cube(i, j) = (i >> j) & 1 ? 1.0 : -1.0;
    const VolumeEstimate c = volume_estimate(VPolytope(cross), rng, 1000000);
    const VolumeEstimate q = volume_estimate(VPolytope(cube), rng, 1000000);
    worst_z = std::max(worst_z, std::abs(c.volume - std::pow(2.0, n) / std::tgamma(n + 1.0)) /
                                    c.std_error);
    worst_z = std::max(worst_z, std::abs(q.volume - std::pow(2.0, n)) / q.std_error);
  }
  return {worst_z <= 3.0, fmt("cross-polytope and cube, n = 3, 4, 1e6 trials, max |z| = %.3f", worst_z)};
}

Outcome sweep_trend() {
  ConstructionParams base;
  base.mc_trials = 10000;
  base.net_budget = 4096;
  const std::vector<int> ns{6, 8, 10, 12};
  const std::vector<int> ks{1, 2};
  const auto rows = run_sweep(ns, ks, base, 1.0 / 64.0);
  std::ostringstream detail;
  bool pass = true;
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const auto& r : rows) {
    if (r.status != "ok") {
      pass = false;
      detail << "cell (" << r.n << "," << r.k << ") " << r.status << "; ";
      continue;
    }
    const double q = std::pow(r.max_section, 1.0 / r.k) *
                     std::sqrt(r.n / (r.k * std::log(static_cast<double>(r.n))));
    lo = std::min(lo, q);
    hi = std::max(hi, q);
  }
  const bool bounded = pass && hi / lo <= 4.0;
  detail << "C_fit = " << hi << ", max/min = " << hi / lo;
  bool monotone = pass;
  for (int k : ks) {
    std::vector<double> cert;
    for (int n : ns) {
      for (const auto& r : rows) {
        if (r.n == n && r.k == k) cert.push_back(r.certificate);
      }
    }
    int inversions = 0;
    for (std::size_t i = 1; i < cert.size(); ++i) inversions += cert[i] < cert[i - 1] ? 1 : 0;
    monotone = monotone && inversions <= 1;
    detail << "; k=" << k << " certificates";
    for (double c : cert) detail << ' ' << fmt("%.4f", c);
    detail << " (" << inversions << " inversions)";
  }
  return {bounded && monotone, detail.str()};
}

std::string strip_timing(const std::string& out) {
  if (out.empty() || out[0] != '{') return out;
  auto j = nlohmann::json::parse(out);
  j.erase("timing");
  return j.dump();
}

Outcome determinism() {
  const std::string report = "acceptance_report.json";
  const std::vector<std::vector<std::string>> commands{
      {"verify-lemmas", "--n", "8", "--k", "3", "--trials", "10000", "--seed", "7"},
      {"build", "--n", "5", "--k", "2", "--points", "300", "--delta", "0.8", "--trials", "10000",
       "--seed", "3", "--out", report},
      {"search", "--in", report, "--restarts", "4", "--seed", "11"},
      {"sweep", "--grid-n", "4,5", "--grid-k", "1", "--points", "200", "--trials", "10000",
       "--restarts", "2", "--steps", "40", "--net-probes", "2000", "--seed", "5"},
  };
  bool pass = true;
  std::string detail;
  std::string saved_report;
  for (const auto& args : commands) {
    std::string outs[2];
    int codes[2];
    for (int rep = 0; rep < 2; ++rep) {
      std::ostringstream out, err;
      codes[rep] = cli::run(args, out, err);
      std::string text = out.str();
      if (args[0] == "build") {
        std::ifstream in(report);
        std::stringstream ss;
        ss << in.rdbuf();
        text = ss.str();
      }
      outs[rep] = strip_timing(text);
    }
    const bool same = codes[0] == 0 && codes[1] == 0 && outs[0] == outs[1] && !outs[0].empty();
    pass = pass && same;
    detail += args[0] + (same ? " identical; " : " DIFFERS; ");
  }
  std::remove(report.c_str());
  return {pass, detail};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"expectation lemma, exact", expectation_exact},
      {"expectation lemma, stochastic", expectation_stochastic},
      {"section integral vs subspace Monte Carlo", section_oracle},
      {"bispherical identity", bispherical},
      {"gamma inequality", gamma_inequality},
      {"Chernoff lemma", chernoff},
      {"Lipschitz property", lipschitz},
      {"net coverage", net_coverage},
      {"Gaussian tail and mass of 3K0", tail_and_mass},
      {"polytope volume oracles", polytope_oracles},
      {"sweep trend", sweep_trend},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failed;
    std::printf("[%s] %2zu %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name,
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
