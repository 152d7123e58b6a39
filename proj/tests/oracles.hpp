// Independent brute-force reference implementations used to check the
// library. Everything here is deliberately written from scratch with plain
// loops and must stay decoupled from the code paths under test.
#pragma once

#include <algorithm>
#include <complex>
#include <vector>

#include "eigengraph/eigen_graph.hpp"
#include "eigengraph/gsc_net.hpp"
#include "eigengraph/matrix.hpp"
#include "eigengraph/rng.hpp"
#include "eigengraph/sampling.hpp"

namespace oracle {

inline eg::PointCloud random_cloud(std::size_t n, eg::Rng& rng, double lo = -1.0,
                                   double hi = 1.0) {
  eg::PointCloud c;
  c.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    c.points.push_back({rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)});
  return c;
}

inline eg::PointCloud random_unit_sphere_cloud(std::size_t n, eg::Rng& rng) {
  return eg::normalize_unit_sphere(random_cloud(n, rng));
}

inline eg::Matrix random_matrix(std::size_t r, std::size_t c, eg::Rng& rng, double scale = 1.0) {
  eg::Matrix m(r, c);
  for (double& x : m.v) x = scale * rng.uniform(-1.0, 1.0);
  return m;
}

// Full-sort k nearest neighbors over an explicit distance list.
inline std::vector<std::size_t> knn_row(const std::vector<double>& dists, std::size_t self,
                                        std::size_t k) {
  std::vector<std::size_t> order;
  for (std::size_t j = 0; j < dists.size(); ++j)
    if (j != self) order.push_back(j);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (dists[a] != dists[b]) return dists[a] < dists[b];
    return a < b;
  });
  order.resize(k);
  return order;
}

inline std::vector<std::size_t> knn_euclidean_row(const eg::PointCloud& cloud, std::size_t i,
                                                  std::size_t k) {
  std::vector<double> d(cloud.size());
  for (std::size_t j = 0; j < cloud.size(); ++j) {
    const double dx = cloud[j][0] - cloud[i][0];
    const double dy = cloud[j][1] - cloud[i][1];
    const double dz = cloud[j][2] - cloud[i][2];
    d[j] = dx * dx + dy * dy + dz * dz;
  }
  return knn_row(d, i, k);
}

inline std::vector<std::size_t> knn_eigen_row(const std::vector<eg::Vec3>& lambdas,
                                              std::size_t i, std::size_t k) {
  std::vector<double> d(lambdas.size());
  for (std::size_t j = 0; j < lambdas.size(); ++j) {
    double s = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
      const double diff = lambdas[j][c] - lambdas[i][c];
      s += diff * diff;
    }
    d[j] = s;
  }
  return knn_row(d, i, k);
}

// Direct-summation structure tensor.
inline eg::Mat3 structure_tensor(const eg::PointCloud& cloud, std::size_t anchor,
                                 const std::vector<std::size_t>& neighbors) {
  eg::Mat3 c;
  for (std::size_t j : neighbors)
    for (std::size_t r = 0; r < 3; ++r)
      for (std::size_t s = 0; s < 3; ++s)
        c(r, s) += (cloud[j][r] - cloud[anchor][r]) * (cloud[j][s] - cloud[anchor][s]);
  return c;
}

// Eigenvalues of a symmetric 3x3 by Cardano root-finding on the
// characteristic polynomial, complex arithmetic throughout. Descending.
inline eg::Vec3 sym3_eigenvalues(const eg::Mat3& m) {
  double scale = 0.0;
  for (double x : m.m) scale = std::max(scale, std::abs(x));
  if (scale == 0.0) return {0.0, 0.0, 0.0};
  eg::Mat3 a = m;
  for (double& x : a.m) x /= scale;

  const double c2 = a(0, 0) + a(1, 1) + a(2, 2);
  const double c1 = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0) + a(0, 0) * a(2, 2) -
                    a(0, 2) * a(2, 0) + a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1);
  const double c0 = eg::det(a);

  // lambda = t + c2/3 turns det(A - lambda I) = 0 into t^3 + p t + r = 0
  const double shift = c2 / 3.0;
  const double p = c1 - c2 * c2 / 3.0;
  const double r = shift * shift * shift - c2 * shift * shift + c1 * shift - c0;

  const std::complex<double> disc = std::complex<double>(r * r / 4.0 + p * p * p / 27.0, 0.0);
  const std::complex<double> sq = std::sqrt(disc);
  std::complex<double> u = std::pow(std::complex<double>(-r / 2.0, 0.0) + sq, 1.0 / 3.0);
  if (std::abs(u) < 1e-150) u = std::pow(std::complex<double>(-r / 2.0, 0.0) - sq, 1.0 / 3.0);

  eg::Vec3 values;
  if (std::abs(u) < 1e-150) {
    values = {shift, shift, shift};
  } else {
    const std::complex<double> omega(-0.5, 0.8660254037844386467637);
    std::complex<double> uk = u;
    for (int k = 0; k < 3; ++k) {
      const std::complex<double> t = uk - p / (3.0 * uk);
      values[std::size_t(k)] = t.real() + shift;
      uk *= omega;
    }
  }
  std::sort(values.begin(), values.end(), std::greater<double>());
  for (double& v : values) v *= scale;
  return values;
}

// Independent greedy farthest-point sampler over a full distance matrix.
inline std::vector<std::size_t> fps_order(const eg::PointCloud& cloud, std::size_t m,
                                          std::size_t seed) {
  const std::size_t n = cloud.size();
  std::vector<std::vector<double>> d(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < 3; ++c) {
        const double diff = cloud[i][c] - cloud[j][c];
        s += diff * diff;
      }
      d[i][j] = std::sqrt(s);
    }
  std::vector<std::size_t> chosen{seed};
  while (chosen.size() < m) {
    std::size_t best = n;
    double best_min = -1.0;
    for (std::size_t cand = 0; cand < n; ++cand) {
      if (std::find(chosen.begin(), chosen.end(), cand) != chosen.end()) continue;
      double mind = d[cand][chosen[0]];
      for (std::size_t s : chosen) mind = std::min(mind, d[cand][s]);
      if (mind > best_min) {
        best_min = mind;
        best = cand;
      }
    }
    chosen.push_back(best);
  }
  return chosen;
}

// Dense matrix-product interpolation: out = W * F with W the T x S weight
// matrix implied by the plan.
inline eg::Matrix interpolate_dense(const eg::InterpolationPlan& plan,
                                    const eg::Matrix& features) {
  std::vector<std::vector<double>> w(plan.sources.rows,
                                     std::vector<double>(features.rows, 0.0));
  for (std::size_t t = 0; t < plan.sources.rows; ++t)
    for (std::size_t j = 0; j < 3; ++j) w[t][plan.sources.at(t, j)] += plan.weights(t, j);
  eg::Matrix out(plan.sources.rows, features.cols);
  for (std::size_t t = 0; t < out.rows; ++t)
    for (std::size_t s = 0; s < features.rows; ++s)
      for (std::size_t c = 0; c < out.cols; ++c) out(t, c) += w[t][s] * features(s, c);
  return out;
}

// Straight-line loop reference for one GSC layer over existing features:
// per anchor and branch, edge vector (f_j - f_i, f_j), single linear + bias +
// ReLU, componentwise max over the branch's neighbors, branch concat.
struct GscBranchWeights {
  eg::Matrix w;  // [2C, out]
  eg::Matrix b;  // [1, out]
};

inline eg::Matrix gsc_layer(const eg::Matrix& features, const eg::IndexMatrix* euclid,
                            const eg::IndexMatrix* eigen, const GscBranchWeights* eu,
                            const GscBranchWeights* ei) {
  const std::size_t n = features.rows;
  auto branch = [&](const eg::IndexMatrix& idx, const GscBranchWeights& wb) {
    const std::size_t out_w = wb.w.cols;
    eg::Matrix pooled(n, out_w);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t o = 0; o < out_w; ++o) {
        double best = 0.0;
        bool first = true;
        for (std::size_t jj = 0; jj < idx.cols; ++jj) {
          const std::size_t j = idx.at(i, jj);
          double h = wb.b(0, o);
          for (std::size_t c = 0; c < features.cols; ++c) {
            const double diff = features(j, c) - features(i, c);
            h += diff * wb.w(c, o);
            h += features(j, c) * wb.w(features.cols + c, o);
          }
          h = std::max(h, 0.0);
          if (first || h > best) {
            best = h;
            first = false;
          }
        }
        pooled(i, o) = best;
      }
    }
    return pooled;
  };
  if (eu && !ei) return branch(*euclid, *eu);
  if (ei && !eu) return branch(*eigen, *ei);
  const eg::Matrix a = branch(*euclid, *eu);
  const eg::Matrix b = branch(*eigen, *ei);
  eg::Matrix out(n, a.cols + b.cols);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < a.cols; ++c) out(i, c) = a(i, c);
    for (std::size_t c = 0; c < b.cols; ++c) out(i, a.cols + c) = b(i, c);
  }
  return out;
}

inline double max_abs_diff(const eg::Matrix& a, const eg::Matrix& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.v.size(); ++i)
    worst = std::max(worst, std::abs(a.v[i] - b.v[i]));
  return worst;
}

}  // namespace oracle
