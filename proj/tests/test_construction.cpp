#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "slicing/construction.hpp"
#include "slicing/errors.hpp"
#include "slicing/serialize.hpp"
#include "slicing/specialfn.hpp"

namespace slicing {
namespace {

Subspace normal_to(const Eigen::VectorXd& u) {
  return Subspace::from_normals(u.transpose());
}

TEST(EmpiricalAveragePhi, Examples) {
  const int n = 4;
  Eigen::MatrixXd pts = Eigen::MatrixXd::Zero(3, n);
  pts(0, 1) = 1.0;
  pts(1, 2) = 1.0;
  pts(2, 3) = -1.0;
  const Subspace F = normal_to(Eigen::VectorXd::Unit(n, 0));
  EXPECT_DOUBLE_EQ(empirical_average_phi(pts, F, n, 1.0), 1.0);

  Eigen::MatrixXd perp = Eigen::MatrixXd::Zero(2, n);
  perp(0, 0) = 1.0;
  perp(1, 0) = -1.0;
  EXPECT_NEAR(empirical_average_phi(perp, F, 1.5, 0.7), std::exp(-0.7 * 2.25), 1e-15);
  EXPECT_THROW(empirical_average_phi(Eigen::MatrixXd(0, n), F, 1.0, 1.0), DomainError);
}

TEST(EmpiricalAveragePhi, MatchesNaiveSum) {
  Rng rng(3);
  const int n = 7;
  Eigen::MatrixXd pts(50, n);
  for (int i = 0; i < 50; ++i) pts.row(i) = sample_sphere(n, rng).transpose();
  const Subspace F = sample_grassmannian(n, 2, rng);
  double naive = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double d = distance_to_subspace(F, n * pts.row(i).transpose());
    naive += std::exp(-d * d);
  }
  naive /= 50;
  EXPECT_NEAR(empirical_average_phi(pts, F, n, 1.0), naive, 1e-14 * std::max(naive, 1e-300));
}

TEST(FindGoodPoints, MeetsThresholdsInFourDimensions) {
  ConstructionParams p;
  p.n = 4;
  p.k = 1;
  p.points = 4096;
  p.delta = 0.125;
  Rng net_rng(5);
  const GrassmannNet net = build_net(4, 1, 0.125, net_rng, 10000, 1000);
  Rng rng(7);
  const GoodPoints g = find_good_points(p, net, rng);
  EXPECT_LE(g.sup_over_net, 1.5);
  EXPECT_LE(g.extension_bound, 2.0);
  EXPECT_EQ(g.points.rows(), 4096);
  EXPECT_LT((g.points.rowwise().norm().array() - 1.0).abs().maxCoeff(), 1e-12);
  // The extension bound holds off the net.
  for (int t = 0; t < 200; ++t) {
    EXPECT_LE(empirical_average_phi(g.points, sample_grassmannian(4, 1, rng), 4, 1.0),
              g.extension_bound);
  }
}

TEST(FindGoodPoints, SinglePointMatchesDirectEvaluation) {
  ConstructionParams p;
  p.n = 3;
  p.k = 1;
  p.points = 1;
  p.delta = 1.0;
  Rng net_rng(9);
  const GrassmannNet net = build_net(3, 1, 1.0, net_rng, 1000, 50);
  Rng rng(11);
  const GoodPoints g = find_good_points(p, net, rng);
  double sup = 0.0;
  for (const auto& m : net.members) {
    const double d = distance_to_subspace(m, 3.0 * g.points.row(0).transpose());
    sup = std::max(sup, std::exp(-d * d));
  }
  EXPECT_DOUBLE_EQ(g.sup_over_net, sup);
}

TEST(FindGoodPoints, FailureNamesTheBestSupremum) {
  // One point against 3 n^{-k/2} = 0.0017: some member of a large family of
  // codim-6 subspaces passes close to it on every draw.
  ConstructionParams p;
  p.n = 12;
  p.k = 6;
  p.points = 1;
  p.delta = 1.0;
  p.point_retries = 3;
  GrassmannNet net;
  net.ambient_dim = 12;
  net.codim = 6;
  net.delta = 1.0;
  Rng net_rng(13);
  for (int i = 0; i < 3000; ++i) net.members.push_back(sample_grassmannian(12, 6, net_rng));
  Rng rng(14);
  try {
    (void)find_good_points(p, net, rng);
    FAIL() << "expected a points-stage failure";
  } catch (const ConstructionError& e) {
    EXPECT_EQ(e.stage(), "points");
    EXPECT_NE(std::string(e.what()).find("n^{k/2+4}"), std::string::npos);
  }
  EXPECT_THROW(find_good_points(p, GrassmannNet{}, rng), DomainError);
}

TEST(Chernoff, LemmaInstance) {
  Rng rng(15);
  const auto r = chernoff_check(0.05, 40, 100000, rng, [](Rng& g) {
    return std::bernoulli_distribution(0.05)(g) ? 1.0 : 0.0;
  });
  EXPECT_NEAR(r.bound, std::exp(-2.0), 1e-15);
  EXPECT_TRUE(r.holds());
  EXPECT_GT(r.tail.estimate, 0.0);
}

TEST(Chernoff, ImpossibleEvents) {
  Rng rng(17);
  const auto zero = chernoff_check(0.2, 10, 10000, rng, [](Rng&) { return 0.0; });
  EXPECT_EQ(zero.tail.estimate, 0.0);
  const auto half = chernoff_check(0.5, 10, 10000, rng, [](Rng& g) {
    return std::bernoulli_distribution(0.5)(g) ? 1.0 : 0.0;
  });
  EXPECT_EQ(half.tail.estimate, 0.0);
}

TEST(Chernoff, PreflightRejectsLargeMean) {
  Rng rng(19);
  EXPECT_THROW(chernoff_check(0.1, 10, 1000, rng, [](Rng&) { return 0.5; }), DomainError);
  EXPECT_THROW(chernoff_check(0.0, 10, 1000, rng, [](Rng&) { return 0.0; }), DomainError);
}

TEST(Chernoff, PhiAverageOverResamples) {
  Rng rng(21);
  const int n = 6;
  const int k = 1;
  const Subspace F = sample_grassmannian(n, k, rng);
  const double E = expectation_integral(n, k, 1.0);
  const int N = 20;
  const auto r = chernoff_check(E, N, 1000, rng, [&](Rng& g) {
    const double d = distance_to_subspace(F, n * sample_sphere(n, g));
    return std::exp(-d * d);
  });
  EXPECT_LE(r.tail.estimate, std::exp(-E * N) + 3.0 * r.tail.std_error);
}

TEST(BuildConstruction, Shape) {
  Rng rng(23);
  const int n = 5;
  const int N = 30;
  Eigen::MatrixXd pts(N, n);
  for (int i = 0; i < N; ++i) pts.row(i) = sample_sphere(n, rng).transpose();
  const Construction c = build_construction(n, pts);
  EXPECT_EQ(c.body.vertex_count(), 2 * N + 2 * n);
  EXPECT_EQ(c.density.size(), 2 * N);
  EXPECT_LT((c.density.centers().rowwise().norm().array() - n).abs().maxCoeff(), 1e-12);
  EXPECT_NEAR(c.body.circumradius(), n, 1e-12);
  const McEstimate all =
      mass_in_set(c.density, [](const Eigen::VectorXd&) { return true; }, rng, 2000);
  EXPECT_EQ(all.estimate, 1.0);
  EXPECT_THROW(build_construction(4, pts), DomainError);
}

class NormalizeFixture : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    Rng rng(25);
    const int n = 5;
    Eigen::MatrixXd pts(200, n);
    for (int i = 0; i < 200; ++i) pts.row(i) = sample_sphere(n, rng).transpose();
    construction_ = new Construction(build_construction(n, pts));
    normalization_ = new Normalization(normalize(*construction_, rng, 20000));
  }
  static void TearDownTestSuite() {
    delete normalization_;
    delete construction_;
  }
  static Construction* construction_;
  static Normalization* normalization_;
};

Construction* NormalizeFixture::construction_ = nullptr;
Normalization* NormalizeFixture::normalization_ = nullptr;

TEST_F(NormalizeFixture, UnitVolumeAndMass) {
  const Normalization& z = *normalization_;
  EXPECT_LT(std::abs(z.volume_k.volume - 1.0), 3.0 * z.volume_k.std_error + 3.0 * z.volume_k0.std_error / z.volume_k0.volume);
  EXPECT_GE(z.mass3.estimate, 0.75 - 3.0 * z.mass3.std_error);
  EXPECT_LE(std::abs(z.unit_mass - 1.0), z.unit_mass_tolerance);
  // a K = 3 K0 as vertex sets up to the volume-root ratio.
  const double a = z.density.scale;
  const double root = std::pow(z.volume_k0.volume, 1.0 / 5);
  EXPECT_NEAR(a / root, 3.0, 0.15);
}

TEST_F(NormalizeFixture, SectionTransform) {
  const Normalization& z = *normalization_;
  Rng rng(27);
  for (int k = 1; k <= 3; ++k) {
    const Subspace F = sample_grassmannian(5, k, rng);
    const double want = std::pow(z.density.scale, k) / z.mass3.estimate *
                        section_integral(construction_->density, F);
    EXPECT_NEAR(z.density.section(F), want, 1e-12 * want);
  }
}

TEST(MaxSectionSearch, AxisMixtureFindsSubspaceThroughAxis) {
  const int n = 4;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(1, n);
  h(0, 0) = 3.0;
  const GaussianMixture f = GaussianMixture::symmetric_from(h);
  Rng rng(29);
  const SearchResult r = max_section_search(
      [&](const Subspace& F) { return section_integral(f, F); }, n, 1, 6, 300, rng);
  EXPECT_NEAR(r.value, 1.0 / std::sqrt(2.0 * std::numbers::pi), 1e-5);
  EXPECT_LT(std::abs(r.best.normal_frame()(0, 0)), 1e-2);

  // Oracle: rotate the normal from e_1 towards e_2 in one plane.
  double best = 0.0;
  for (int i = 0; i <= 2000; ++i) {
    const double t = 0.5 * std::numbers::pi * i / 2000;
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
    u[0] = std::cos(t);
    u[1] = std::sin(t);
    best = std::max(best, section_integral(f, normal_to(u)));
  }
  EXPECT_NEAR(r.value, best, 1e-5);
}

TEST(MaxSectionSearch, TraceIsBoundedByValueAndSeedsAgree) {
  Rng mix_rng(31);
  const int n = 6;
  Eigen::MatrixXd h(5, n);
  for (int i = 0; i < 5; ++i) h.row(i) = 2.0 * sample_sphere(n, mix_rng).transpose();
  const GaussianMixture f = GaussianMixture::symmetric_from(h);
  auto obj = [&](const Subspace& F) { return section_integral(f, F); };
  std::vector<double> values;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed);
    const SearchResult r = max_section_search(obj, n, 2, 8, 300, rng);
    EXPECT_EQ(*std::max_element(r.trace.begin(), r.trace.end()), r.value);
    EXPECT_EQ(obj(r.best), r.value);
    for (int t = 0; t < 2; ++t) EXPECT_GE(r.value, obj(sample_grassmannian(n, 2, rng)));
    values.push_back(r.value);
  }
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  EXPECT_LE(*hi / *lo - 1.0, 0.01);
}

TEST(MaxSectionSearch, UsesNetMembers) {
  const int n = 3;
  Rng rng(33);
  const GrassmannNet net = build_net(n, 1, 0.5, rng, 2000, 200);
  const SearchResult r = max_section_search([](const Subspace&) { return 1.0; }, n, 1, 2, 5,
                                            rng, &net);
  EXPECT_EQ(r.trace.size(), 1 + net.members.size() + 2 * 64 + 2 * 6);
  EXPECT_THROW(max_section_search([](const Subspace&) { return 1.0; }, n, 3, 2, 5, rng),
               DomainError);
}

TEST(DovrCertificate, Examples) {
  EXPECT_DOUBLE_EQ(dovr_certificate(1.0, 1), 1.0);
  EXPECT_DOUBLE_EQ(dovr_certificate(1.0, 4), 1.0);
  const double v = 4.0 * std::pow(2.0 * std::numbers::pi * 9.0, -1.0);
  EXPECT_NEAR(dovr_certificate(v, 2), 3.7599424119465006, 1e-12);
  EXPECT_GT(dovr_certificate(0.1, 2), dovr_certificate(0.2, 2));
  EXPECT_THROW(dovr_certificate(0.0, 1), DomainError);
  EXPECT_THROW(dovr_certificate(-1.0, 1), DomainError);
}

TEST(ConstructionParams, Validation) {
  ConstructionParams p;
  EXPECT_NO_THROW(p.validate());
  EXPECT_NEAR(p.resolved_delta(), std::pow(8.0, -1.5), 1e-15);
  EXPECT_NEAR(p.point_threshold(), 3.0 / std::sqrt(8.0), 1e-15);
  auto bad = [](auto mutate) {
    ConstructionParams q;
    mutate(q);
    EXPECT_THROW(q.validate(), DomainError);
  };
  bad([](ConstructionParams& q) { q.n = 15; });
  bad([](ConstructionParams& q) { q.n = 1; });
  bad([](ConstructionParams& q) { q.k = q.n; });
  bad([](ConstructionParams& q) { q.k = 0; });
  bad([](ConstructionParams& q) { q.points = 0; });
  bad([](ConstructionParams& q) { q.points = (1 << 18) + 1; });
  bad([](ConstructionParams& q) { q.delta = 1.5; });
  bad([](ConstructionParams& q) { q.mc_trials = 9999; });
  bad([](ConstructionParams& q) { q.net_budget = 0; });
}

ConstructionParams small_params() {
  ConstructionParams p;
  p.n = 4;
  p.k = 1;
  p.points = 256;
  p.delta = 0.5;
  p.net_probes = 2000;
  p.candidate_budget = 200;
  p.mc_trials = 10000;
  p.search_restarts = 4;
  p.search_steps = 60;
  p.master_seed = 77;
  return p;
}

TEST(RunConstruction, ReportInvariants) {
  const ConstructionReport r = run_construction(small_params());
  EXPECT_LE(r.good.sup_over_net, r.good.threshold);
  EXPECT_LE(r.extension_probe_sup, r.good.extension_bound);
  EXPECT_LT(r.net_max_gap, r.delta);
  ASSERT_TRUE(r.norm && r.search);
  EXPECT_GE(r.norm->mass3.estimate, 0.75 - 3.0 * r.norm->mass3.std_error);
  EXPECT_EQ(*std::max_element(r.search->trace.begin(), r.search->trace.end()), r.search->value);
  EXPECT_DOUBLE_EQ(r.certificate, dovr_certificate(r.search->value, 1));
  EXPECT_NEAR(r.search->value,
              r.norm->density.scale / r.norm->mass3.estimate * r.section_f0_at_max, 1e-12);
  for (const char* stage : {"net", "points", "extension", "normalize", "search"}) {
    EXPECT_TRUE(r.wall_seconds.count(stage)) << stage;
  }
}

TEST(RunConstruction, SerialAndParallelReportsMatch) {
  auto strip = [](nlohmann::json j) {
    j.erase("timing");
    return j.dump();
  };
  const auto a = strip(to_json(run_construction(small_params(), Exec::serial)));
  const auto b = strip(to_json(run_construction(small_params(), Exec::parallel)));
  EXPECT_EQ(a, b);
}

TEST(RunConstruction, DefaultDeltaIsRejectedWithAdvice) {
  ConstructionParams p;
  p.n = 10;
  try {
    (void)run_construction(p);
    FAIL() << "expected a net-stage failure";
  } catch (const ConstructionError& e) {
    EXPECT_EQ(e.stage(), "net");
    EXPECT_NE(std::string(e.what()).find("--delta"), std::string::npos);
  }
}

TEST(Sweep, LadderAndRows) {
  const auto rungs = delta_ladder(6, 1);
  EXPECT_NEAR(rungs.front(), std::pow(6.0, -1.5), 1e-15);
  EXPECT_EQ(rungs.back(), 1.0);
  EXPECT_TRUE(std::is_sorted(rungs.begin(), rungs.end()));

  EXPECT_EQ(scaled_point_count(8, 1, 1.0 / 64), 182);
  EXPECT_EQ(scaled_point_count(30, 6, 1.0), 1 << 18);

  ConstructionParams base = small_params();
  base.delta.reset();
  base.net_budget = 600;
  const auto rows = run_sweep({3, 4}, {1}, base);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.status, "ok") << r.n;
    EXPECT_GT(r.certificate, 0.0);
  }
}

TEST(Sweep, FailedCellsAreRecorded) {
  ConstructionParams base = small_params();
  base.delta = 0.05;
  base.net_budget = 1;
  const auto rows = run_sweep({4}, {1, 2}, base);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].status, "failed:net");
  EXPECT_EQ(rows[1].status, "failed:net");
}

}  // namespace
}  // namespace slicing
