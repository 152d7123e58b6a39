#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "eigen_graph.hpp"
#include "geometry.hpp"
#include "matrix.hpp"

namespace eg {

// Ordered indices into a parent cloud; the first element is the seed.
struct SampleSelection {
  std::vector<std::size_t> indices;
  std::size_t seed_index = 0;
};

// Greedy farthest-point order: each successive index maximizes the minimum
// Euclidean distance to the points already selected, ties broken by lowest
// index.
inline SampleSelection fps(const PointCloud& cloud, std::size_t m, std::size_t seed_index = 0) {
  const std::size_t n = cloud.size();
  if (m < 1 || m > n)
    throw invalid_argument("fps: m must satisfy 1 <= m <= N (m=" + std::to_string(m) +
                           ", N=" + std::to_string(n) + ")");
  if (seed_index >= n)
    throw invalid_argument("fps: seed_index " + std::to_string(seed_index) +
                           " out of range for N=" + std::to_string(n));
  SampleSelection sel;
  sel.seed_index = seed_index;
  sel.indices.reserve(m);
  sel.indices.push_back(seed_index);

  std::vector<double> min_d2(n);
  std::vector<char> taken(n, 0);
  taken[seed_index] = 1;
  for (std::size_t j = 0; j < n; ++j) min_d2[j] = dist2(cloud[j], cloud[seed_index]);

  while (sel.indices.size() < m) {
    std::size_t best = n;
    double best_d2 = -1.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (taken[j]) continue;
      if (min_d2[j] > best_d2) {
        best_d2 = min_d2[j];
        best = j;
      }
    }
    taken[best] = 1;
    sel.indices.push_back(best);
    for (std::size_t j = 0; j < n; ++j) {
      if (taken[j]) continue;
      min_d2[j] = std::min(min_d2[j], dist2(cloud[j], cloud[best]));
    }
  }
  return sel;
}

// Every floor(N/m)-th index. The "FPS off" ablation arm.
inline SampleSelection stride_subsample(std::size_t n, std::size_t m) {
  if (m < 1 || m > n)
    throw invalid_argument("stride_subsample: m must satisfy 1 <= m <= N (m=" +
                           std::to_string(m) + ", N=" + std::to_string(n) + ")");
  const std::size_t stride = n / m;
  SampleSelection sel;
  sel.seed_index = 0;
  sel.indices.reserve(m);
  for (std::size_t j = 0; j < m; ++j) sel.indices.push_back(j * stride);
  return sel;
}

namespace detail {

inline void check_selection(std::size_t n, const SampleSelection& sel, const char* op) {
  for (std::size_t idx : sel.indices)
    if (idx >= n)
      throw invalid_argument(std::string(op) + ": selection index " + std::to_string(idx) +
                             " out of range for " + std::to_string(n) + " rows");
}

}  // namespace detail

inline PointCloud gather(const PointCloud& cloud, const SampleSelection& sel) {
  detail::check_selection(cloud.size(), sel, "gather");
  PointCloud out;
  out.points.reserve(sel.indices.size());
  for (std::size_t idx : sel.indices) out.points.push_back(cloud[idx]);
  return out;
}

inline Matrix gather(const Matrix& features, const SampleSelection& sel) {
  detail::check_selection(features.rows, sel, "gather");
  Matrix out(sel.indices.size(), features.cols);
  for (std::size_t r = 0; r < sel.indices.size(); ++r) {
    const auto src = features.row(sel.indices[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

// Per target point: its 3 nearest sources and convex inverse-square-distance
// weights. A target that coincides with a source gets weight 1 on the lowest
// indexed such source.
struct InterpolationPlan {
  IndexMatrix sources;  // T x 3
  Matrix weights;       // T x 3, rows sum to 1
};

inline InterpolationPlan plan_interpolation(const PointCloud& targets, const PointCloud& sources) {
  const std::size_t t_count = targets.size(), s_count = sources.size();
  if (s_count < 3)
    throw invalid_argument("plan_interpolation: need at least 3 source points (got " +
                           std::to_string(s_count) + ")");
  InterpolationPlan plan;
  plan.sources = IndexMatrix(t_count, 3);
  plan.weights = Matrix(t_count, 3);

  std::vector<std::pair<double, std::size_t>> cand(s_count);
  for (std::size_t t = 0; t < t_count; ++t) {
    for (std::size_t s = 0; s < s_count; ++s) cand[s] = {dist2(targets[t], sources[s]), s};
    std::partial_sort(cand.begin(), cand.begin() + 3, cand.end());
    for (std::size_t j = 0; j < 3; ++j) plan.sources.at(t, j) = cand[j].second;

    if (cand[0].first == 0.0) {
      plan.weights(t, 0) = 1.0;
      continue;
    }
    double inv[3], total = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
      const double d = std::max(std::sqrt(cand[j].first), 1e-10);
      inv[j] = 1.0 / (d * d);
      total += inv[j];
    }
    for (std::size_t j = 0; j < 3; ++j) plan.weights(t, j) = inv[j] / total;
  }
  return plan;
}

// Target row t = sum_j weights(t,j) * source_features row sources(t,j).
inline Matrix interpolate(const InterpolationPlan& plan, const Matrix& source_features) {
  if (source_features.cols == 0)
    throw invalid_argument("interpolate: source features have width 0");
  for (std::size_t idx : plan.sources.data)
    if (idx >= source_features.rows)
      throw invalid_argument("interpolate: plan index " + std::to_string(idx) +
                             " out of range for " + std::to_string(source_features.rows) +
                             " source rows");
  Matrix out(plan.sources.rows, source_features.cols);
  for (std::size_t t = 0; t < plan.sources.rows; ++t) {
    double* dst = out.v.data() + t * out.cols;
    for (std::size_t j = 0; j < 3; ++j) {
      const double w = plan.weights(t, j);
      const double* src = source_features.v.data() + plan.sources.at(t, j) * source_features.cols;
      for (std::size_t c = 0; c < out.cols; ++c) dst[c] += w * src[c];
    }
  }
  return out;
}

}  // namespace eg
