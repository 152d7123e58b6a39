#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "eigengraph/sampling.hpp"
#include "oracles.hpp"

using namespace eg;

TEST_CASE("fps: hand-checked greedy order on a line") {
  const PointCloud cloud({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {9, 0, 0}});
  const SampleSelection sel = fps(cloud, 3, 0);
  REQUIRE(sel.indices == std::vector<std::size_t>{0, 3, 2});
}

TEST_CASE("fps: m = N is a permutation starting at the seed") {
  Rng rng(31);
  const PointCloud cloud = oracle::random_cloud(12, rng);
  const SampleSelection sel = fps(cloud, 12, 5);
  REQUIRE(sel.indices.size() == 12);
  REQUIRE(sel.indices[0] == 5);
  REQUIRE(std::set<std::size_t>(sel.indices.begin(), sel.indices.end()).size() == 12);
}

TEST_CASE("fps: m = 1 returns the seed only") {
  const PointCloud cloud({{0, 0, 0}, {1, 1, 1}});
  REQUIRE(fps(cloud, 1, 1).indices == std::vector<std::size_t>{1});
}

TEST_CASE("fps: m out of range is rejected") {
  const PointCloud cloud({{0, 0, 0}, {1, 1, 1}});
  REQUIRE_THROWS_AS(fps(cloud, 3, 0), invalid_argument);
  REQUIRE_THROWS_AS(fps(cloud, 0, 0), invalid_argument);
  REQUIRE_THROWS_AS(fps(cloud, 2, 2), invalid_argument);
}

TEST_CASE("fps matches the greedy brute-force oracle") {
  Rng rng(32);
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t n = 4 + std::size_t(rng.below(40));
    const std::size_t m = 1 + std::size_t(rng.below(n));
    const std::size_t seed = std::size_t(rng.below(n));
    const PointCloud cloud = oracle::random_cloud(n, rng);
    REQUIRE(fps(cloud, m, seed).indices == oracle::fps_order(cloud, m, seed));
  }
}

TEST_CASE("fps indices invariant under rigid transforms") {
  Rng rng(33);
  for (int rep = 0; rep < 10; ++rep) {
    const PointCloud cloud = oracle::random_unit_sphere_cloud(40, rng);
    RigidTransform t = random_rotation(RotationAxes::EulerXYZ, rng.next_u64());
    t.translation = {rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
    REQUIRE(fps(cloud, 15, 0).indices ==
            fps(apply_transform(cloud, t), 15, 0).indices);
  }
}

TEST_CASE("fps covering radius is non-increasing in m") {
  Rng rng(34);
  const PointCloud cloud = oracle::random_cloud(60, rng);
  auto covering_radius = [&](const std::vector<std::size_t>& chosen) {
    double worst = 0.0;
    for (std::size_t j = 0; j < cloud.size(); ++j) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t s : chosen) best = std::min(best, norm(cloud[j] - cloud[s]));
      worst = std::max(worst, best);
    }
    return worst;
  };
  const SampleSelection full = fps(cloud, 40, 0);
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t m = 1; m <= 40; ++m) {
    const std::vector<std::size_t> prefix(full.indices.begin(),
                                          full.indices.begin() + std::ptrdiff_t(m));
    const double r = covering_radius(prefix);
    REQUIRE(r <= prev + 1e-12);
    prev = r;
  }
}

TEST_CASE("stride_subsample picks every floor(N/m)-th index") {
  const SampleSelection sel = stride_subsample(10, 3);
  REQUIRE(sel.indices == std::vector<std::size_t>{0, 3, 6});
}

TEST_CASE("gather: identity and permutation") {
  Matrix f(3, 2);
  f(0, 0) = 1;
  f(0, 1) = 2;
  f(1, 0) = 3;
  f(1, 1) = 4;
  f(2, 0) = 5;
  f(2, 1) = 6;
  SampleSelection identity{{0, 1, 2}, 0};
  REQUIRE(gather(f, identity) == f);
  SampleSelection swap{{2, 0}, 2};
  const Matrix g = gather(f, swap);
  REQUIRE(g.rows == 2);
  REQUIRE(g(0, 0) == 5);
  REQUIRE(g(1, 1) == 2);
}

TEST_CASE("gather: random selection checked row by row") {
  Rng rng(35);
  const PointCloud cloud = oracle::random_cloud(20, rng);
  SampleSelection sel;
  for (int i = 0; i < 9; ++i) sel.indices.push_back(std::size_t(rng.below(20)));
  sel.seed_index = sel.indices[0];
  const PointCloud out = gather(cloud, sel);
  for (std::size_t r = 0; r < sel.indices.size(); ++r)
    REQUIRE(out[r] == cloud[sel.indices[r]]);
}

TEST_CASE("gather: out-of-range index is rejected") {
  Matrix f(3, 2);
  SampleSelection sel{{0, 3}, 0};
  REQUIRE_THROWS_AS(gather(f, sel), invalid_argument);
}

TEST_CASE("plan_interpolation: coincident target takes full weight") {
  const PointCloud sources({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {4, 4, 4}});
  const PointCloud targets({{1, 0, 0}});
  const InterpolationPlan plan = plan_interpolation(targets, sources);
  REQUIRE(plan.sources.at(0, 0) == 1);
  REQUIRE(plan.weights(0, 0) == Catch::Approx(1.0).margin(1e-9));
  REQUIRE(std::abs(plan.weights(0, 1)) < 1e-9);
  REQUIRE(std::abs(plan.weights(0, 2)) < 1e-9);
}

TEST_CASE("plan_interpolation: equidistant sources share weight equally") {
  const PointCloud sources({{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {9, 9, 9}});
  const PointCloud targets({{0, 0, 0}});
  const InterpolationPlan plan = plan_interpolation(targets, sources);
  for (std::size_t j = 0; j < 3; ++j)
    REQUIRE(plan.weights(0, j) == Catch::Approx(1.0 / 3.0).margin(1e-12));
}

TEST_CASE("plan_interpolation matches the inverse-square formula oracle") {
  Rng rng(36);
  for (int rep = 0; rep < 20; ++rep) {
    const PointCloud sources = oracle::random_cloud(15, rng);
    const PointCloud targets = oracle::random_cloud(8, rng);
    const InterpolationPlan plan = plan_interpolation(targets, sources);
    for (std::size_t t = 0; t < targets.size(); ++t) {
      double inv[3], total = 0.0;
      for (std::size_t j = 0; j < 3; ++j) {
        const double d = std::max(norm(targets[t] - sources[plan.sources.at(t, j)]), 1e-10);
        inv[j] = 1.0 / (d * d);
        total += inv[j];
      }
      double wsum = 0.0;
      for (std::size_t j = 0; j < 3; ++j) {
        REQUIRE(std::abs(plan.weights(t, j) - inv[j] / total) < 1e-12);
        REQUIRE(plan.weights(t, j) >= 0.0);
        wsum += plan.weights(t, j);
      }
      REQUIRE(std::abs(wsum - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("plan_interpolation: fewer than 3 sources is rejected") {
  const PointCloud sources({{0, 0, 0}, {1, 0, 0}});
  const PointCloud targets({{0.5, 0, 0}});
  REQUIRE_THROWS_AS(plan_interpolation(targets, sources), invalid_argument);
}

TEST_CASE("interpolate: constant features are preserved") {
  Rng rng(37);
  const PointCloud sources = oracle::random_cloud(10, rng);
  const PointCloud targets = oracle::random_cloud(6, rng);
  const InterpolationPlan plan = plan_interpolation(targets, sources);
  Matrix f(10, 3);
  for (std::size_t r = 0; r < 10; ++r)
    for (std::size_t c = 0; c < 3; ++c) f(r, c) = 7.25;
  const Matrix out = interpolate(plan, f);
  for (double x : out.v) REQUIRE(x == Catch::Approx(7.25).margin(1e-12));
}

TEST_CASE("interpolate: one-hot weights copy the selected rows") {
  InterpolationPlan plan;
  plan.sources = IndexMatrix(2, 3);
  plan.sources.at(0, 0) = 2;
  plan.sources.at(1, 0) = 0;
  plan.weights = Matrix(2, 3);
  plan.weights(0, 0) = 1.0;
  plan.weights(1, 0) = 1.0;
  Rng rng(38);
  const Matrix f = oracle::random_matrix(4, 5, rng);
  const Matrix out = interpolate(plan, f);
  for (std::size_t c = 0; c < 5; ++c) {
    REQUIRE(out(0, c) == f(2, c));
    REQUIRE(out(1, c) == f(0, c));
  }
}

TEST_CASE("interpolate matches the dense matrix-product oracle") {
  Rng rng(39);
  for (int rep = 0; rep < 20; ++rep) {
    const PointCloud sources = oracle::random_cloud(12, rng);
    const PointCloud targets = oracle::random_cloud(7, rng);
    const InterpolationPlan plan = plan_interpolation(targets, sources);
    const Matrix f = oracle::random_matrix(12, 4, rng);
    REQUIRE(oracle::max_abs_diff(interpolate(plan, f), oracle::interpolate_dense(plan, f)) <
            1e-12);
  }
}

TEST_CASE("interpolate is linear in the source features") {
  Rng rng(40);
  const PointCloud sources = oracle::random_cloud(9, rng);
  const PointCloud targets = oracle::random_cloud(5, rng);
  const InterpolationPlan plan = plan_interpolation(targets, sources);
  const Matrix a = oracle::random_matrix(9, 3, rng);
  const Matrix b = oracle::random_matrix(9, 3, rng);
  const double alpha = 1.7;
  Matrix combo(9, 3);
  for (std::size_t i = 0; i < combo.v.size(); ++i) combo.v[i] = alpha * a.v[i] + b.v[i];
  const Matrix lhs = interpolate(plan, combo);
  const Matrix ia = interpolate(plan, a);
  const Matrix ib = interpolate(plan, b);
  for (std::size_t i = 0; i < lhs.v.size(); ++i)
    REQUIRE(std::abs(lhs.v[i] - (alpha * ia.v[i] + ib.v[i])) < 1e-12);
}

TEST_CASE("interpolate: zero-width features are rejected") {
  InterpolationPlan plan;
  plan.sources = IndexMatrix(1, 3);
  plan.weights = Matrix(1, 3);
  REQUIRE_THROWS_AS(interpolate(plan, Matrix(4, 0)), invalid_argument);
}
