#include "slicing/construction.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>

#include "slicing/errors.hpp"

namespace slicing {

namespace {

enum Stream : std::uint64_t {
  kNetStream = 1,
  kPointStream = 2,
  kNormalizeStream = 3,
  kSearchStream = 4,
  kExtensionStream = 5,
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

class StageTimer {
 public:
  StageTimer(std::map<std::string, double>& sink, std::string name)
      : sink_(sink), name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}
  ~StageTimer() {
    sink_[name_] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::map<std::string, double>& sink_;
  std::string name_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

double ConstructionParams::resolved_delta() const {
  return delta ? *delta : std::pow(static_cast<double>(n), -0.5 * k - 1.0);
}

double ConstructionParams::point_threshold() const {
  return 3.0 * std::pow(static_cast<double>(n), -0.5 * k);
}

void ConstructionParams::validate() const {
  if (n < 2 || n > max_dimension) {
    throw DomainError("n must lie in [2, " + std::to_string(max_dimension) +
                      "]; larger dimensions are outside desk scale");
  }
  if (k < 1 || k > n - 1) throw DomainError("k must lie in [1, n-1]");
  if (points < 1 || points > kMaxPoints) {
    throw DomainError("points must lie in [1, 2^18]");
  }
  const double d = resolved_delta();
  if (!(d > 0.0) || d > std::sqrt(2.0)) throw DomainError("delta must lie in (0, sqrt(2)]");
  if (mc_trials < 10000) throw DomainError("mc_trials must be at least 10^4");
  if (net_probes < 1 || candidate_budget < 1) {
    throw DomainError("net_probes and candidate_budget must be positive");
  }
  if (net_budget < 1 || net_budget > kMaxNetSize) {
    throw DomainError("net_budget must lie in [1, 2^16]");
  }
  if (point_retries < 1) throw DomainError("point_retries must be positive");
  if (search_restarts < 1 || search_steps < 1) {
    throw DomainError("search_restarts and search_steps must be positive");
  }
  if (!(beta > 0.0)) throw DomainError("beta must be positive");
}

double empirical_average_phi(const Eigen::MatrixXd& points, const Subspace& F, double scale,
                             double beta) {
  if (points.rows() == 0) throw DomainError("empirical_average_phi: empty point set");
  if (points.cols() != F.ambient_dim()) {
    throw DomainError("empirical_average_phi: dimension mismatch");
  }
  const Eigen::MatrixXd proj = points * F.normal_frame().transpose();
  const Eigen::ArrayXd d2 = proj.rowwise().squaredNorm().array() * (scale * scale);
  return (-beta * d2).exp().mean();
}

GoodPoints find_good_points(const ConstructionParams& params, const GrassmannNet& net, Rng& rng,
                            Exec exec) {
  params.validate();
  if (net.ambient_dim != params.n || net.codim != params.k || net.members.empty()) {
    throw DomainError("find_good_points: net does not match (n, k)");
  }
  const int n = params.n;
  GoodPoints out;
  out.threshold = params.point_threshold();
  double best = std::numeric_limits<double>::infinity();

  for (int attempt = 1; attempt <= params.point_retries; ++attempt) {
    Eigen::MatrixXd pts(params.points, n);
    for (int i = 0; i < params.points; ++i) pts.row(i) = sample_sphere(n, rng).transpose();
    const auto values = map_indices(
        net.members.size(),
        [&](std::size_t j) { return empirical_average_phi(pts, net.members[j], n, params.beta); },
        exec);
    const double sup = *std::max_element(values.begin(), values.end());
    best = std::min(best, sup);
    if (sup <= out.threshold) {
      out.points = std::move(pts);
      out.sup_over_net = sup;
      out.extension_bound = sup + n * net.delta;
      out.attempts = attempt;
      return out;
    }
  }
  const double needed = std::pow(static_cast<double>(n), 0.5 * params.k + 4.0);
  throw ConstructionError(
      "points", "sup over net of the phi-average stayed above 3 n^{-k/2} = " +
                    fmt(out.threshold) + " (best " + fmt(best) + " after " +
                    std::to_string(params.point_retries) + " draws of N = " +
                    std::to_string(params.points) + "); the existence argument uses N ~ n^{k/2+4} = " +
                    fmt(needed) + " up to a constant");
}

ChernoffResult chernoff_check(double p, int N, std::uint64_t trials, Rng& rng,
                              const UnitSampler& sampler, Exec exec) {
  if (!(p > 0.0) || p > 1.0) throw DomainError("chernoff_check: p must lie in (0, 1]");
  if (N < 1 || trials < 1) throw DomainError("chernoff_check: N and trials must be positive");

  constexpr std::uint64_t kPreflight = 100000;
  const Moments pre = accumulate(ChunkPlan{next_seed(rng), kPreflight, 16}, sampler, exec);
  if (pre.mean() > p + 3.0 * pre.std_error()) {
    throw DomainError("chernoff_check: sampler mean " + fmt(pre.mean()) + " exceeds p = " + fmt(p));
  }

  // sum >= 3 p N, with a relative slack for the rounding in 3 p N itself.
  const double target = 3.0 * p * N * (1.0 - 1e-12);
  const auto hits = count_hits(
      ChunkPlan{next_seed(rng), trials, 64},
      [&](Rng& r) {
        double sum = 0.0;
        for (int i = 0; i < N; ++i) sum += sampler(r);
        return sum >= target;
      },
      exec);
  ChernoffResult res;
  res.tail = binomial_estimate(hits, trials);
  res.bound = std::exp(-p * N);
  res.preflight_mean = pre.mean();
  return res;
}

Construction build_construction(int n, const Eigen::MatrixXd& points) {
  if (points.cols() != n || points.rows() < 1) {
    throw DomainError("build_construction: points must be N x n");
  }
  const auto N = points.rows();
  Eigen::MatrixXd half = static_cast<double>(n) * points;
  GaussianMixture f0 = GaussianMixture::symmetric_from(half);

  Eigen::MatrixXd verts(2 * N + 2 * n, n);
  verts.topRows(2 * N) = f0.centers();
  for (int j = 0; j < n; ++j) {
    verts.row(2 * N + 2 * j).setZero();
    verts.row(2 * N + 2 * j + 1).setZero();
    verts(2 * N + 2 * j, j) = n;
    verts(2 * N + 2 * j + 1, j) = -n;
  }
  // Centers have norm n up to rounding; the circumradius absorbs it.
  const double radius = std::max<double>(n, verts.rowwise().norm().maxCoeff());
  return Construction{VPolytope(verts, radius), std::move(f0), points};
}

double NormalizedDensity::section(const Subspace& F) const {
  return std::pow(scale, F.codim()) / mass3 * section_integral(*base, F);
}

Normalization normalize(const Construction& c, Rng& rng, std::uint64_t mc_trials, Exec exec) {
  const int n = c.body.ambient_dim();
  const VolumeOptions vopts{1e-4, 4000, exec};

  // One rerun sized from the first run's hit rate when it misses 5% relative error.
  auto precise_volume = [&](const VPolytope& body, double scale, const char* what) {
    VolumeEstimate v = volume_estimate(body, rng, mc_trials, scale, vopts);
    double rel = v.std_error / v.volume;
    if (rel > 0.05) {
      const double factor = (rel / 0.04) * (rel / 0.04);
      const auto trials = static_cast<std::uint64_t>(std::ceil(factor * mc_trials));
      v = volume_estimate(body, rng, trials, scale, vopts);
      rel = v.std_error / v.volume;
    }
    if (rel > 0.05) {
      throw ConstructionError("normalize", std::string(what) + " relative error " + fmt(rel) +
                                               " exceeds 5%; raise mc_trials");
    }
    return v;
  };

  const VolumeEstimate vk0 = precise_volume(c.body, 1.0, "|K0|");
  const VolumeEstimate v3k0 = precise_volume(c.body, 3.0, "|3K0|");

  // Common random numbers: mass of 3K0 and of aK from the same draws.
  Rng mass_rng = rng;
  Rng mass_rng_copy = mass_rng;
  rng.discard(1);
  const McEstimate mass3 =
      mass_in_set(c.density, [&](const Eigen::VectorXd& x) { return contains(c.body, x, 3.0); },
                  mass_rng, mc_trials, exec);
  if (mass3.estimate < 0.75 - 3.0 * mass3.std_error) {
    throw ConstructionError("mass", "int_{3K0} f0 >= 3/4 violated: estimate " +
                                        fmt(mass3.estimate) + " +- " + fmt(mass3.std_error));
  }

  const double root_k0 = std::pow(vk0.volume, 1.0 / n);
  const double a = std::pow(v3k0.volume, 1.0 / n);
  // |3K0|^{1/n} = 3 |K0|^{1/n}, checked at 3 pooled standard errors of the 1/n-th roots.
  const double se_root = std::hypot(3.0 * root_k0 * vk0.std_error / (n * vk0.volume),
                                    a * v3k0.std_error / (n * v3k0.volume));
  if (std::abs(a - 3.0 * root_k0) > 3.0 * se_root) {
    throw ConstructionError("normalize", "|3K0|^{1/n} = " + fmt(a) + " disagrees with 3|K0|^{1/n} = " +
                                             fmt(3.0 * root_k0));
  }

  VPolytope k_body = c.body.scaled(1.0 / root_k0);
  const VolumeEstimate vk = precise_volume(k_body, 1.0, "|K|");
  if (std::abs(vk.volume - 1.0) > 3.0 * std::hypot(vk.std_error, vk0.std_error / vk0.volume)) {
    throw ConstructionError("normalize", "|K| = " + fmt(vk.volume) + " is not 1");
  }

  const McEstimate mass_ak = mass_in_set(
      c.density, [&](const Eigen::VectorXd& x) { return contains(k_body, x, a); }, mass_rng_copy,
      mc_trials, exec);
  const double unit = static_cast<double>(mass_ak.hits) / static_cast<double>(mass3.hits);
  // Draws are shared, so the two counts differ only by discordant samples.
  const double discordant =
      std::abs(static_cast<double>(mass_ak.hits) - static_cast<double>(mass3.hits));
  const double tol = 3.0 * std::max(1.0, std::sqrt(discordant)) / static_cast<double>(mass3.hits) +
                     3.0 * se_root / a * n;
  if (std::abs(unit - 1.0) > tol) {
    throw ConstructionError("normalize", "int_K f = " + fmt(unit) + " is not 1");
  }

  Normalization out{std::move(k_body),
                    NormalizedDensity{std::make_shared<const GaussianMixture>(c.density), a,
                                      mass3.estimate},
                    vk0,
                    v3k0,
                    vk,
                    mass3,
                    mass_ak,
                    unit,
                    tol};
  return out;
}

constexpr std::size_t kScreeningPerRestart = 64;

SearchResult max_section_search(const SectionObjective& objective, int n, int k, int restarts,
                                int steps, Rng& rng, const GrassmannNet* net, Exec exec) {
  if (n < 2 || k < 1 || k > n - 1) throw DomainError("max_section_search: need 1 <= k <= n-1");
  if (restarts < 1 || steps < 1) throw DomainError("max_section_search: restarts, steps >= 1");

  SearchResult out{sample_grassmannian(n, k, rng), 0.0, {}};
  out.value = objective(out.best);
  out.trace.push_back(out.value);

  // Screening pool: net members plus random subspaces. The best of them start
  // the climbs; peaks of a mixture's section are narrow, so random starts
  // alone rarely land in the right basin.
  std::vector<Subspace> pool;
  if (net != nullptr && !net->members.empty()) {
    if (net->ambient_dim != n || net->codim != k) {
      throw DomainError("max_section_search: net does not match (n, k)");
    }
    pool = net->members;
  }
  const std::size_t random_pool = kScreeningPerRestart * static_cast<std::size_t>(restarts);
  const std::uint64_t pool_seed = next_seed(rng);
  for (std::size_t i = 0; i < random_pool; ++i) {
    Rng local = make_rng(pool_seed, i);
    pool.push_back(sample_grassmannian(n, k, local));
  }
  const auto values =
      map_indices(pool.size(), [&](std::size_t j) { return objective(pool[j]); }, exec);
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return values[x] > values[y]; });
  for (std::size_t j = 0; j < values.size(); ++j) {
    out.trace.push_back(values[j]);
    if (values[j] > out.value) {
      out.value = values[j];
      out.best = pool[j];
    }
  }

  const std::uint64_t base_seed = next_seed(rng);
  const double first = 0.3;
  const double last = 1e-3;
  struct Climb {
    std::optional<Subspace> best;
    double value = 0.0;
    std::vector<double> trace;
  };
  auto climbs = map_indices(
      static_cast<std::size_t>(restarts),
      [&](std::size_t r) {
        Rng local = make_rng(base_seed, r);
        Subspace current = pool[order[r]];
        double value = values[order[r]];
        Climb c;
        c.trace.reserve(static_cast<std::size_t>(steps) + 1);
        c.trace.push_back(value);
        for (int s = 0; s < steps; ++s) {
          const double t = steps > 1 ? static_cast<double>(s) / (steps - 1) : 1.0;
          const double step = first * std::pow(last / first, t);
          Subspace cand = current.rotated(random_rotation(n, step, local));
          const double v = objective(cand);
          c.trace.push_back(v);
          if (v > value) {
            value = v;
            current = std::move(cand);
          }
        }
        c.best = std::move(current);
        c.value = value;
        return c;
      },
      exec);

  for (auto& c : climbs) {
    out.trace.insert(out.trace.end(), c.trace.begin(), c.trace.end());
    if (c.value > out.value) {
      out.value = c.value;
      out.best = *c.best;
    }
  }
  return out;
}

double dovr_certificate(double max_section_value, int k) {
  if (!(max_section_value > 0.0)) throw DomainError("dovr_certificate: section must be positive");
  if (k < 1) throw DomainError("dovr_certificate: k must be >= 1");
  return std::pow(max_section_value, -1.0 / k);
}

ConstructionReport run_construction(const ConstructionParams& params, Exec exec) {
  params.validate();
  ConstructionReport rep;
  rep.params = params;
  rep.delta = params.resolved_delta();
  const int n = params.n;
  const int k = params.k;

  // The net cannot be smaller than the covering number, roughly (1/delta)^{k(n-k)}.
  const double dims = static_cast<double>(k) * (n - k);
  if (dims * std::log(1.0 / rep.delta) > std::log(64.0 * static_cast<double>(params.net_budget))) {
    throw ConstructionError(
        "net", "delta = " + fmt(rep.delta) + " needs on the order of (1/delta)^{k(n-k)} = e^" +
                   fmt(dims * std::log(1.0 / rep.delta)) + " members, beyond the budget of " +
                   std::to_string(params.net_budget) + "; pass a larger --delta");
  }

  GrassmannNet net;
  {
    StageTimer t(rep.wall_seconds, "net");
    Rng rng = make_rng(params.master_seed, kNetStream);
    NetOptions opts;
    opts.max_members = params.net_budget;
    opts.exec = exec;
    net = build_net(n, k, rep.delta, rng, params.net_probes, params.candidate_budget, opts);
  }
  rep.net_size = net.members.size();
  rep.net_probes = net.coverage_probes;
  rep.net_max_gap = net.coverage_max_gap;

  {
    StageTimer t(rep.wall_seconds, "points");
    Rng rng = make_rng(params.master_seed, kPointStream);
    rep.good = find_good_points(params, net, rng, exec);
  }

  {
    StageTimer t(rep.wall_seconds, "extension");
    Rng rng = make_rng(params.master_seed, kExtensionStream);
    rep.extension_probes = 1000;
    const std::uint64_t seed = next_seed(rng);
    const auto values = map_indices(
        rep.extension_probes,
        [&](std::size_t i) {
          Rng local = make_rng(seed, i);
          return empirical_average_phi(rep.good.points, sample_grassmannian(n, k, local), n,
                                       params.beta);
        },
        exec);
    rep.extension_probe_sup = *std::max_element(values.begin(), values.end());
    if (rep.extension_probe_sup > rep.good.extension_bound) {
      throw ConstructionError("extension", "Lipschitz extension bound violated on a random probe");
    }
  }

  Construction c = build_construction(n, rep.good.points);

  {
    StageTimer t(rep.wall_seconds, "normalize");
    Rng rng = make_rng(params.master_seed, kNormalizeStream);
    rep.norm = normalize(c, rng, params.mc_trials, exec);
  }
  rep.gluskin = gluskin_ratio(n, static_cast<double>(c.body.vertex_count()),
                              rep.norm->volume_k0.volume);

  {
    StageTimer t(rep.wall_seconds, "search");
    Rng rng = make_rng(params.master_seed, kSearchStream);
    const NormalizedDensity& f = rep.norm->density;
    rep.search = max_section_search([&](const Subspace& F) { return f.section(F); }, n, k,
                                    params.search_restarts, params.search_steps, rng, &net, exec);
  }

  const Subspace& best = rep.search->best;
  rep.section_f0_at_max = section_integral(c.density, best);
  rep.phi_lemma_at_max = phi_average(c.density, best, 1.0);
  rep.phi_section_at_max = phi_average(c.density, best, 0.5);
  rep.section_bound = 4.0 * std::pow(2.0 * std::numbers::pi * n, -0.5 * k);
  rep.normalized_section =
      std::pow(rep.search->value, 1.0 / k) / std::sqrt(k * std::log(static_cast<double>(n)) / n);
  rep.certificate = dovr_certificate(rep.search->value, k);
  return rep;
}

std::vector<double> delta_ladder(int n, int k, double ratio) {
  std::vector<double> rungs;
  for (double d = std::pow(static_cast<double>(n), -0.5 * k - 1.0); d < 1.0; d *= ratio) {
    rungs.push_back(d);
  }
  rungs.push_back(1.0);
  return rungs;
}

int scaled_point_count(int n, int k, double c) {
  if (!(c > 0.0)) throw DomainError("scaled_point_count: constant must be positive");
  const double N = std::ceil(c * std::pow(static_cast<double>(n), 0.5 * k + 4.0));
  return static_cast<int>(std::clamp(N, 1.0, static_cast<double>(kMaxPoints)));
}

std::vector<SweepRow> run_sweep(const std::vector<int>& ns, const std::vector<int>& ks,
                                const ConstructionParams& base,
                                std::optional<double> point_constant, Exec exec) {
  std::vector<SweepRow> rows;
  for (int n : ns) {
    for (int k : ks) {
      ConstructionParams p = base;
      p.n = n;
      p.k = k;
      p.master_seed = derive_seed(base.master_seed, static_cast<std::uint64_t>(n) * 64 + k);
      if (point_constant) p.points = scaled_point_count(n, k, *point_constant);
      const std::vector<double> rungs =
          base.delta ? std::vector<double>{*base.delta} : delta_ladder(n, k);
      SweepRow row;
      row.n = n;
      row.k = k;
      row.points = p.points;
      row.seed = p.master_seed;
      for (std::size_t r = 0; r < rungs.size(); ++r) {
        p.delta = rungs[r];
        row.delta = rungs[r];
        row.status = "ok";
        try {
          const ConstructionReport rep = run_construction(p, exec);
          row.sup_over_net = rep.good.sup_over_net;
          row.vol_est = rep.norm->volume_k0.volume;
          row.mass3 = rep.norm->mass3.estimate;
          row.max_section = rep.search->value;
          row.certificate = rep.certificate;
          break;
        } catch (const ConstructionError& e) {
          row.status = "failed:" + e.stage();
          // Only a net over budget moves to the next rung.
          if (e.stage() != "net") break;
        } catch (const UndersampledError&) {
          row.status = "failed:undersampled";
          break;
        } catch (const SolverError&) {
          row.status = "failed:solver";
          break;
        } catch (const DomainError&) {
          row.status = "failed:params";
          break;
        }
      }
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace slicing
