#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "geometry.hpp"

namespace eg {

// Dense row-major index table: N rows of k neighbor indices each.
struct IndexMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<std::size_t> data;

  IndexMatrix() = default;
  IndexMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}

  std::size_t& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  std::size_t at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const std::size_t> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
  std::span<std::size_t> row(std::size_t r) { return {data.data() + r * cols, cols}; }

  bool operator==(const IndexMatrix&) const = default;
};

// Per-point neighbor indices in Euclidean space (k1 per row) and in
// eigenvalue space (k2 per row). Rows are sorted by ascending distance with
// ties broken by ascending index; the anchor itself is excluded.
struct NeighborGraph {
  IndexMatrix euclid;
  IndexMatrix eigen;

  std::size_t k1() const { return euclid.cols; }
  std::size_t k2() const { return eigen.cols; }
};

struct StructureTensorSet {
  std::vector<Mat3> tensors;
};

// Sorted eigenvalue triples (l1 >= l2 >= l3 >= 0) of each point's local
// structure tensor. Eigenvector matrices are kept only when requested.
struct EigenDescriptorSet {
  std::vector<Vec3> lambdas;
  std::vector<Mat3> vectors;  // empty unless requested; columns match lambdas

  std::size_t size() const { return lambdas.size(); }
};

struct EigDecomposition {
  Vec3 values;   // descending
  Mat3 vectors;  // orthonormal columns, vectors.col(q) pairs with values[q]
};

namespace detail {

// Brute-force k-nearest scan under an arbitrary squared-distance functor.
// This is the normative kNN semantics: any acceleration structure would have
// to reproduce these indices bit-for-bit.
template <class Dist2Fn>
IndexMatrix knn_scan(std::size_t n, std::size_t k, Dist2Fn&& d2) {
  IndexMatrix out(n, k);
  std::vector<std::pair<double, std::size_t>> cand(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t m = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      cand[m++] = {d2(i, j), j};
    }
    std::partial_sort(cand.begin(), cand.begin() + std::ptrdiff_t(k), cand.end());
    for (std::size_t j = 0; j < k; ++j) out.at(i, j) = cand[j].second;
  }
  return out;
}

// Cyclic Jacobi for a symmetric 3x3. Always produces orthonormal vectors,
// including at eigenvalue collisions.
inline void jacobi_sym3(const Mat3& input, Vec3& values, Mat3& vectors) {
  double a[3][3] = {{input(0, 0), input(0, 1), input(0, 2)},
                    {input(1, 0), input(1, 1), input(1, 2)},
                    {input(2, 0), input(2, 1), input(2, 2)}};
  double v[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (int sweep = 0; sweep < 64; ++sweep) {
    const double off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    if (off == 0.0) break;
    static constexpr int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
    for (const auto& pq : pairs) {
      const int p = pq[0], q = pq[1];
      if (a[p][q] == 0.0) continue;
      const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
      const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                       (std::abs(theta) + std::sqrt(theta * theta + 1.0));
      const double c = 1.0 / std::sqrt(t * t + 1.0);
      const double s = t * c;
      for (int r = 0; r < 3; ++r) {
        const double arp = a[r][p], arq = a[r][q];
        a[r][p] = c * arp - s * arq;
        a[r][q] = s * arp + c * arq;
      }
      for (int r = 0; r < 3; ++r) {
        const double apr = a[p][r], aqr = a[q][r];
        a[p][r] = c * apr - s * aqr;
        a[q][r] = s * apr + c * aqr;
      }
      for (int r = 0; r < 3; ++r) {
        const double vrp = v[r][p], vrq = v[r][q];
        v[r][p] = c * vrp - s * vrq;
        v[r][q] = s * vrp + c * vrq;
      }
    }
  }
  values = {a[0][0], a[1][1], a[2][2]};
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c) vectors(r, c) = v[r][c];
}

inline void sort_eigenpairs_descending(Vec3& values, Mat3& vectors) {
  std::array<std::size_t, 3> order{0, 1, 2};
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  const Vec3 w = values;
  const Mat3 v = vectors;
  for (std::size_t q = 0; q < 3; ++q) {
    values[q] = w[order[q]];
    vectors.set_col(q, v.col(order[q]));
  }
}

inline double reconstruction_residual(const Mat3& a, const Vec3& values, const Mat3& vectors) {
  double worst = 0.0;
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c) {
      double s = 0.0;
      for (std::size_t q = 0; q < 3; ++q) s += values[q] * vectors(r, q) * vectors(c, q);
      worst = std::max(worst, std::abs(a(r, c) - s));
    }
  return worst;
}

}  // namespace detail

// Row i holds the k nearest points to point i by Euclidean distance, self
// excluded, ties broken by ascending index.
inline IndexMatrix knn_euclidean(const PointCloud& cloud, std::size_t k) {
  const std::size_t n = cloud.size();
  if (k < 1 || k >= n)
    throw invalid_argument("knn_euclidean: k must satisfy 1 <= k <= N-1 (k=" +
                           std::to_string(k) + ", N=" + std::to_string(n) + ")");
  const Vec3* pts = cloud.points.data();
  return detail::knn_scan(n, k,
                          [pts](std::size_t i, std::size_t j) { return dist2(pts[i], pts[j]); });
}

// C_i = sum_j (x_ij - x_i)(x_ij - x_i)^T over the row's neighbors.
inline StructureTensorSet structure_tensors(const PointCloud& cloud,
                                            const IndexMatrix& euclid_idx) {
  const std::size_t n = cloud.size();
  if (euclid_idx.rows != n)
    throw invalid_argument("structure_tensors: index rows (" + std::to_string(euclid_idx.rows) +
                           ") do not match cloud size (" + std::to_string(n) + ")");
  for (std::size_t idx : euclid_idx.data)
    if (idx >= n)
      throw invalid_argument("structure_tensors: neighbor index " + std::to_string(idx) +
                             " out of range for N=" + std::to_string(n));
  StructureTensorSet out;
  out.tensors.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    Mat3& c = out.tensors[i];
    for (std::size_t j : euclid_idx.row(i)) {
      const Vec3 d = cloud[j] - cloud[i];
      c(0, 0) += d[0] * d[0];
      c(0, 1) += d[0] * d[1];
      c(0, 2) += d[0] * d[2];
      c(1, 1) += d[1] * d[1];
      c(1, 2) += d[1] * d[2];
      c(2, 2) += d[2] * d[2];
    }
    c(1, 0) = c(0, 1);
    c(2, 0) = c(0, 2);
    c(2, 1) = c(1, 2);
  }
  return out;
}

// Eigendecomposition of a symmetric 3x3, eigenvalues sorted descending and
// clamped at zero when within -1e-10 of it. The analytic path (trace-shifted
// characteristic cubic, trigonometric roots, cross-product eigenvectors)
// handles the common case; a cyclic-Jacobi pass takes over near degenerate
// discriminants where the cross products lose rank.
inline EigDecomposition eig_sym3(const Mat3& c) {
  const double scale = std::max(1.0, max_abs(c));
  const double sym_tol = 1e-10 * scale;
  if (std::abs(c(0, 1) - c(1, 0)) > sym_tol || std::abs(c(0, 2) - c(2, 0)) > sym_tol ||
      std::abs(c(1, 2) - c(2, 1)) > sym_tol)
    throw invalid_argument("eig_sym3: input is not symmetric within 1e-10");

  Mat3 a;
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t col = 0; col < 3; ++col) a(r, col) = 0.5 * (c(r, col) + c(col, r));

  EigDecomposition out;
  out.vectors = Mat3::identity();

  const double amax = max_abs(a);
  if (amax == 0.0) {
    out.values = {0.0, 0.0, 0.0};
    return out;
  }
  // Work on a unit-scale copy so the formulas below stay conditioned.
  Mat3 b = a;
  for (double& x : b.m) x /= amax;

  const double p1 = b(0, 1) * b(0, 1) + b(0, 2) * b(0, 2) + b(1, 2) * b(1, 2);
  const double q = (b(0, 0) + b(1, 1) + b(2, 2)) / 3.0;
  const double d0 = b(0, 0) - q, d1 = b(1, 1) - q, d2 = b(2, 2) - q;
  const double p2 = d0 * d0 + d1 * d1 + d2 * d2 + 2.0 * p1;

  bool need_jacobi = false;
  if (p2 <= 1e-28) {
    out.values = {q, q, q};  // (numerically) a multiple of the identity
  } else {
    const double p = std::sqrt(p2 / 6.0);
    Mat3 shifted = b;
    shifted(0, 0) -= q;
    shifted(1, 1) -= q;
    shifted(2, 2) -= q;
    for (double& x : shifted.m) x /= p;
    const double r = det(shifted) / 2.0;
    if (std::abs(r) >= 1.0 - 1e-12) need_jacobi = true;
    const double phi = std::acos(std::clamp(r, -1.0, 1.0)) / 3.0;
    constexpr double two_thirds_pi = 2.0943951023931954923;
    const double e1 = q + 2.0 * p * std::cos(phi);
    const double e3 = q + 2.0 * p * std::cos(phi + two_thirds_pi);
    out.values = {e1, 3.0 * q - e1 - e3, e3};

    if (!need_jacobi) {
      // Eigenvector for an extreme eigenvalue: the largest cross product of
      // two rows of (B - lambda I) spans its null space complement.
      auto null_direction = [&](double lambda, Vec3& dir) {
        Mat3 m = b;
        m(0, 0) -= lambda;
        m(1, 1) -= lambda;
        m(2, 2) -= lambda;
        const Vec3 r0 = m.row(0), r1 = m.row(1), r2 = m.row(2);
        const Vec3 c01 = cross(r0, r1), c02 = cross(r0, r2), c12 = cross(r1, r2);
        const double n01 = norm2(c01), n02 = norm2(c02), n12 = norm2(c12);
        Vec3 best = c01;
        double best_n = n01;
        if (n02 > best_n) {
          best = c02;
          best_n = n02;
        }
        if (n12 > best_n) {
          best = c12;
          best_n = n12;
        }
        if (best_n < 1e-24) return false;
        dir = (1.0 / std::sqrt(best_n)) * best;
        return true;
      };
      Vec3 v1, v3;
      if (null_direction(out.values[0], v1) && null_direction(out.values[2], v3)) {
        v3 = v3 - dot(v3, v1) * v1;
        const double n3 = norm(v3);
        if (n3 < 1e-12) {
          need_jacobi = true;
        } else {
          v3 = (1.0 / n3) * v3;
          const Vec3 v2 = cross(v3, v1);
          out.vectors.set_col(0, v1);
          out.vectors.set_col(1, v2);
          out.vectors.set_col(2, v3);
        }
      } else {
        need_jacobi = true;
      }
    }
  }

  if (!need_jacobi &&
      detail::reconstruction_residual(b, out.values, out.vectors) >
          1e-10 * std::max(1.0, std::abs(out.values[0]))) {
    need_jacobi = true;
  }
  if (need_jacobi) {
    detail::jacobi_sym3(b, out.values, out.vectors);
    detail::sort_eigenpairs_descending(out.values, out.vectors);
  }

  for (double& w : out.values) {
    w *= amax;
    if (w < 0.0 && w >= -1e-10) w = 0.0;
  }
  return out;
}

// knn_euclidean -> structure_tensors -> eig_sym3 for every point.
inline EigenDescriptorSet eigen_descriptors(const PointCloud& cloud, std::size_t k1,
                                            bool keep_vectors = false) {
  const std::size_t n = cloud.size();
  if (k1 < 1 || k1 >= n)
    throw invalid_argument("eigen_descriptors: k1 must satisfy 1 <= k1 <= N-1 (k1=" +
                           std::to_string(k1) + ", N=" + std::to_string(n) + ")");
  const IndexMatrix idx = knn_euclidean(cloud, k1);
  const StructureTensorSet tensors = structure_tensors(cloud, idx);
  EigenDescriptorSet out;
  out.lambdas.resize(n);
  if (keep_vectors) out.vectors.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    EigDecomposition d = eig_sym3(tensors.tensors[i]);
    out.lambdas[i] = d.values;
    if (keep_vectors) out.vectors[i] = d.vectors;
  }
  return out;
}

// L2 distance between sorted eigenvalue triples.
inline double eigen_distance(const Vec3& a, const Vec3& b) { return norm(a - b); }

// Row i holds the k2 nearest points under eigen_distance, self excluded,
// ties broken by ascending index.
inline IndexMatrix knn_eigen(const EigenDescriptorSet& descriptors, std::size_t k2) {
  const std::size_t n = descriptors.size();
  if (k2 < 1 || k2 >= n)
    throw invalid_argument("knn_eigen: k2 must satisfy 1 <= k2 <= N-1 (k2=" +
                           std::to_string(k2) + ", N=" + std::to_string(n) + ")");
  const Vec3* l = descriptors.lambdas.data();
  return detail::knn_scan(n, k2,
                          [l](std::size_t i, std::size_t j) { return dist2(l[i], l[j]); });
}

// The Eigen-Graph: Euclidean neighbors, per-point eigenvalue descriptors,
// and eigenvalue-space neighbors in one pass.
inline std::pair<NeighborGraph, EigenDescriptorSet> build_graph(const PointCloud& cloud,
                                                                std::size_t k1,
                                                                std::size_t k2) {
  NeighborGraph graph;
  graph.euclid = knn_euclidean(cloud, k1);
  EigenDescriptorSet desc;
  {
    const StructureTensorSet tensors = structure_tensors(cloud, graph.euclid);
    desc.lambdas.resize(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i)
      desc.lambdas[i] = eig_sym3(tensors.tensors[i]).values;
  }
  graph.eigen = knn_eigen(desc, k2);
  return {std::move(graph), std::move(desc)};
}

// Dense pairwise eigen-distance table. Refused above kDenseEigenDistanceLimit
// points; callers there use the per-anchor scans instead, which produce
// identical results.
inline constexpr std::size_t kDenseEigenDistanceLimit = 4096;

struct EigenDistanceMatrix {
  std::size_t n = 0;
  std::vector<double> d;  // n*n

  double at(std::size_t i, std::size_t j) const { return d[i * n + j]; }
};

inline EigenDistanceMatrix dense_eigen_distances(const EigenDescriptorSet& descriptors) {
  const std::size_t n = descriptors.size();
  if (n > kDenseEigenDistanceLimit)
    throw invalid_argument("dense_eigen_distances: N=" + std::to_string(n) +
                           " exceeds the dense limit of " +
                           std::to_string(kDenseEigenDistanceLimit));
  EigenDistanceMatrix out;
  out.n = n;
  out.d.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dij = eigen_distance(descriptors.lambdas[i], descriptors.lambdas[j]);
      out.d[i * n + j] = dij;
      out.d[j * n + i] = dij;
    }
  return out;
}

}  // namespace eg
