#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "autodiff.hpp"
#include "eigen_graph.hpp"
#include "geometry.hpp"
#include "matrix.hpp"
#include "sampling.hpp"

namespace eg {

// Which neighbor space(s) the layer groups over.
enum class BranchMode { EuOnly, EiOnly, Both };

// Level-1 edge features on the Euclidean branch. The eigenvalue branch is
// always (lambda_p - lambda_i, lambda_p) over eigenvalue-space neighbors.
enum class InputRecipe {
  Coord6,         // (x_j - x_i, x_j)
  CoordEig12,     // (x_j - x_i, x_j, l_j - l_i, l_j)
  CoordEigDist13, // CoordEig12 plus d_ij
  Eigen6,         // (l_j - l_i, l_j): no coordinate information
};

inline std::size_t recipe_width(InputRecipe r) {
  switch (r) {
    case InputRecipe::Coord6: return 6;
    case InputRecipe::CoordEig12: return 12;
    case InputRecipe::CoordEigDist13: return 13;
    case InputRecipe::Eigen6: return 6;
  }
  throw invalid_argument("recipe_width: unknown recipe");
}

inline const char* to_string(BranchMode b) {
  switch (b) {
    case BranchMode::EuOnly: return "eu";
    case BranchMode::EiOnly: return "ei";
    case BranchMode::Both: return "eu+ei";
  }
  return "?";
}

inline const char* to_string(InputRecipe r) {
  switch (r) {
    case InputRecipe::Coord6: return "coord-6";
    case InputRecipe::CoordEig12: return "coord-eig-12";
    case InputRecipe::CoordEigDist13: return "coord-eig-dist-13";
    case InputRecipe::Eigen6: return "eigen-6";
  }
  return "?";
}

inline BranchMode branch_from_string(const std::string& s) {
  if (s == "eu") return BranchMode::EuOnly;
  if (s == "ei") return BranchMode::EiOnly;
  if (s == "eu+ei") return BranchMode::Both;
  throw invalid_argument("unknown branch mode '" + s + "' (expected eu, ei, or eu+ei)");
}

inline InputRecipe recipe_from_string(const std::string& s) {
  if (s == "coord-6") return InputRecipe::Coord6;
  if (s == "coord-eig-12") return InputRecipe::CoordEig12;
  if (s == "coord-eig-dist-13") return InputRecipe::CoordEigDist13;
  if (s == "eigen-6") return InputRecipe::Eigen6;
  throw invalid_argument("unknown input recipe '" + s + "'");
}

struct GscConfig {
  std::size_t k1 = 20;
  std::size_t k2 = 20;
  BranchMode branch = BranchMode::Both;
  InputRecipe recipe = InputRecipe::CoordEigDist13;
  bool use_fps = true;  // off: stride subsampling
  std::vector<std::size_t> level_sizes = {1024, 512, 256};
  std::vector<std::size_t> level_widths = {64, 128, 256};
  std::vector<std::size_t> head_hidden = {256, 128};
  double dropout_rate = 0.5;
  std::size_t class_count = 5;
  std::size_t part_count = 0;                  // > 0 enables the segmentation head
  std::vector<std::size_t> seg_hidden = {128};

  void validate() const {
    if (k1 < 1 || k2 < 1) throw invalid_argument("GscConfig: k1 and k2 must be >= 1");
    if (level_sizes.empty() || level_sizes.size() != level_widths.size())
      throw invalid_argument("GscConfig: level_sizes and level_widths must be non-empty and "
                             "of equal length");
    for (std::size_t i = 0; i < level_sizes.size(); ++i) {
      if (level_sizes[i] == 0 || level_widths[i] == 0)
        throw invalid_argument("GscConfig: level sizes and widths must be positive");
      if (level_sizes[i] <= std::max(k1, k2))
        throw invalid_argument("GscConfig: level " + std::to_string(i + 1) + " size " +
                               std::to_string(level_sizes[i]) +
                               " must exceed the neighbor counts");
      if (i > 0 && level_sizes[i] > level_sizes[i - 1])
        throw invalid_argument("GscConfig: level sizes must be non-increasing");
      if (branch == BranchMode::Both && level_widths[i] % 2 != 0)
        throw invalid_argument("GscConfig: level width " + std::to_string(level_widths[i]) +
                               " must be even when both branches are enabled");
    }
    if (class_count < 2) throw invalid_argument("GscConfig: class_count must be >= 2");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0)
      throw invalid_argument("GscConfig: dropout_rate must be in [0, 1)");
  }

  std::size_t levels() const { return level_sizes.size(); }

  std::size_t branch_out(std::size_t level) const {
    return branch == BranchMode::Both ? level_widths[level] / 2 : level_widths[level];
  }

  // Edge-feature width entering the level's per-branch MLP.
  std::size_t edge_width(std::size_t level, bool eu_branch) const {
    if (level == 0) return eu_branch ? recipe_width(recipe) : 6;
    return 2 * level_widths[level - 1];
  }

  std::size_t head_input_width() const {
    std::size_t w = 0;
    for (std::size_t c : level_widths) w += 2 * c;
    return w;
  }

  std::size_t seg_input_width() const {
    std::size_t w = class_count;  // repeated one-hot category label
    for (std::size_t c : level_widths) w += c;
    return w;
  }
};

// Level-1 edge blocks, one row per (anchor, neighbor) pair.
struct RecipeBlocks {
  Matrix eu;  // (N*k1) x recipe_width
  Matrix ei;  // (N*k2) x 6
};

// Assemble the level-1 input features. Both blocks are constants of the
// forward pass: no gradient flows into geometry.
inline RecipeBlocks input_recipe(const PointCloud& cloud, const EigenDescriptorSet& descriptors,
                                 const NeighborGraph& graph, InputRecipe recipe) {
  const std::size_t n = cloud.size();
  if (descriptors.size() != n || graph.euclid.rows != n || graph.eigen.rows != n)
    throw invalid_argument("input_recipe: graph/descriptors do not match the cloud");
  const std::size_t k1 = graph.k1(), k2 = graph.k2();
  RecipeBlocks blocks;
  blocks.eu = Matrix(n * k1, recipe_width(recipe));
  blocks.ei = Matrix(n * k2, 6);

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t jj = 0; jj < k1; ++jj) {
      const std::size_t j = graph.euclid.at(i, jj);
      double* row = blocks.eu.v.data() + (i * k1 + jj) * blocks.eu.cols;
      switch (recipe) {
        case InputRecipe::Coord6:
        case InputRecipe::CoordEig12:
        case InputRecipe::CoordEigDist13: {
          const Vec3 rel = cloud[j] - cloud[i];
          row[0] = rel[0];
          row[1] = rel[1];
          row[2] = rel[2];
          row[3] = cloud[j][0];
          row[4] = cloud[j][1];
          row[5] = cloud[j][2];
          if (recipe != InputRecipe::Coord6) {
            const Vec3 dl = descriptors.lambdas[j] - descriptors.lambdas[i];
            row[6] = dl[0];
            row[7] = dl[1];
            row[8] = dl[2];
            row[9] = descriptors.lambdas[j][0];
            row[10] = descriptors.lambdas[j][1];
            row[11] = descriptors.lambdas[j][2];
          }
          if (recipe == InputRecipe::CoordEigDist13) row[12] = norm(rel);
          break;
        }
        case InputRecipe::Eigen6: {
          const Vec3 dl = descriptors.lambdas[j] - descriptors.lambdas[i];
          row[0] = dl[0];
          row[1] = dl[1];
          row[2] = dl[2];
          row[3] = descriptors.lambdas[j][0];
          row[4] = descriptors.lambdas[j][1];
          row[5] = descriptors.lambdas[j][2];
          break;
        }
      }
    }
    for (std::size_t pp = 0; pp < k2; ++pp) {
      const std::size_t p = graph.eigen.at(i, pp);
      double* row = blocks.ei.v.data() + (i * k2 + pp) * blocks.ei.cols;
      const Vec3 dl = descriptors.lambdas[p] - descriptors.lambdas[i];
      row[0] = dl[0];
      row[1] = dl[1];
      row[2] = dl[2];
      row[3] = descriptors.lambdas[p][0];
      row[4] = descriptors.lambdas[p][1];
      row[5] = descriptors.lambdas[p][2];
    }
  }
  return blocks;
}

// (f_j - f_i, f_j) edge rows for every (anchor i, neighbor j) in idx.
inline Tape::NodeId group_features(Tape& tape, Tape::NodeId features, const IndexMatrix& idx) {
  const Matrix& fv = tape.value(features);
  if (idx.rows != fv.rows)
    throw invalid_argument("group_features: index rows (" + std::to_string(idx.rows) +
                           ") do not match feature rows (" + std::to_string(fv.rows) + ")");
  std::vector<std::size_t> nbr(idx.data.begin(), idx.data.end());
  std::vector<std::size_t> anchor(idx.rows * idx.cols);
  for (std::size_t i = 0; i < idx.rows; ++i)
    for (std::size_t j = 0; j < idx.cols; ++j) anchor[i * idx.cols + j] = i;
  const Tape::NodeId nbr_f = tape.gather_rows(features, std::move(nbr));
  const Tape::NodeId anchor_f = tape.gather_rows(features, std::move(anchor));
  return tape.concat_cols({tape.subtract(nbr_f, anchor_f), nbr_f});
}

// Tape handles of the parameters bound for one forward pass.
struct BoundParams {
  std::map<std::string, Tape::NodeId> ids;

  Tape::NodeId at(const std::string& name) const {
    auto it = ids.find(name);
    if (it == ids.end())
      throw invalid_argument("BoundParams: parameter '" + name + "' is not bound");
    return it->second;
  }
};

inline BoundParams bind_params(Tape& tape, const ParamStore& params) {
  BoundParams bound;
  for (const auto& [name, entry] : params.entries()) bound.ids[name] = tape.leaf(entry.value);
  return bound;
}

// Collect d(loss)/d(param) for every bound parameter after tape.backward().
inline GradMap collect_grads(const Tape& tape, const BoundParams& bound) {
  GradMap grads;
  for (const auto& [name, id] : bound.ids) grads[name] = tape.grad(id);
  return grads;
}

namespace detail {

inline std::string level_param(std::size_t level, bool eu_branch, const char* what) {
  return "enc" + std::to_string(level + 1) + (eu_branch ? ".eu." : ".ei.") + what;
}

// Shared per-edge MLP (linear + bias + ReLU) followed by max-pool over each
// anchor's k edge rows.
inline Tape::NodeId branch_forward(Tape& tape, Tape::NodeId edges, std::size_t k,
                                   std::size_t level, bool eu_branch,
                                   const BoundParams& params) {
  const Tape::NodeId w = params.at(level_param(level, eu_branch, "w0"));
  const Tape::NodeId b = params.at(level_param(level, eu_branch, "b0"));
  const Tape::NodeId h = tape.relu(tape.bias_add(tape.linear(edges, w), b));
  return tape.max_pool_rows(h, k);
}

}  // namespace detail

// Per-branch MLP + max-pool on prebuilt edge blocks, then branch concat.
// Pass kNoNode for a branch the mode disables.
inline constexpr Tape::NodeId kNoNode = std::size_t(-1);

inline Tape::NodeId gsc_from_blocks(Tape& tape, Tape::NodeId eu_edges, std::size_t k1,
                                    Tape::NodeId ei_edges, std::size_t k2,
                                    const GscConfig& cfg, const BoundParams& params,
                                    std::size_t level) {
  switch (cfg.branch) {
    case BranchMode::EuOnly:
      return detail::branch_forward(tape, eu_edges, k1, level, true, params);
    case BranchMode::EiOnly:
      return detail::branch_forward(tape, ei_edges, k2, level, false, params);
    case BranchMode::Both: {
      const Tape::NodeId eu = detail::branch_forward(tape, eu_edges, k1, level, true, params);
      const Tape::NodeId ei = detail::branch_forward(tape, ei_edges, k2, level, false, params);
      return tape.concat_cols({eu, ei});
    }
  }
  throw invalid_argument("gsc_from_blocks: unknown branch mode");
}

// One GSC layer over existing features: group in each enabled neighbor
// space, shared per-edge MLP, max-pool per branch, concat.
inline Tape::NodeId gsc_forward(Tape& tape, Tape::NodeId features, const NeighborGraph& graph,
                                const GscConfig& cfg, const BoundParams& params,
                                std::size_t level) {
  Tape::NodeId eu = kNoNode, ei = kNoNode;
  if (cfg.branch != BranchMode::EiOnly) eu = group_features(tape, features, graph.euclid);
  if (cfg.branch != BranchMode::EuOnly) ei = group_features(tape, features, graph.eigen);
  return gsc_from_blocks(tape, eu, graph.k1(), ei, graph.k2(), cfg, params, level);
}

// Geometry-only per-cloud precomputation: level coordinates, Eigen-Graphs,
// level-1 recipe blocks, FPS selections, and (for segmentation) the
// interpolation plans back to level 1. Reusable across epochs; none of it
// carries gradients.
struct LevelPlan {
  PointCloud coords;
  NeighborGraph graph;
  EigenDescriptorSet desc;
  SampleSelection selection;  // into the previous level's rows (empty at level 0 when unused)
  std::shared_ptr<const InterpolationPlan> to_level1;
};

struct CloudPlan {
  std::vector<LevelPlan> levels;
};

inline CloudPlan plan_cloud(const PointCloud& cloud, const GscConfig& cfg,
                            std::size_t fps_seed_index = 0, bool with_interpolation = false) {
  cfg.validate();
  CloudPlan plan;
  plan.levels.resize(cfg.levels());
  // Until the first FPS pass the row order is still the caller's point
  // order, so the caller-supplied seed index applies; afterwards rows follow
  // the canonical greedy order and the seed is row 0.
  bool order_canonical = false;
  for (std::size_t l = 0; l < cfg.levels(); ++l) {
    LevelPlan& lp = plan.levels[l];
    const PointCloud& parent = l == 0 ? cloud : plan.levels[l - 1].coords;
    if (parent.size() < cfg.level_sizes[l])
      throw invalid_argument("encoder level " + std::to_string(l + 1) + " needs " +
                             std::to_string(cfg.level_sizes[l]) + " points but only " +
                             std::to_string(parent.size()) + " are available");
    if (parent.size() == cfg.level_sizes[l] && l == 0) {
      lp.coords = parent;
    } else {
      lp.selection = cfg.use_fps
                         ? fps(parent, cfg.level_sizes[l],
                               order_canonical ? 0 : fps_seed_index)
                         : stride_subsample(parent.size(), cfg.level_sizes[l]);
      lp.coords = gather(parent, lp.selection);
      if (cfg.use_fps) order_canonical = true;
    }
    auto [graph, desc] = build_graph(lp.coords, cfg.k1, cfg.k2);
    lp.graph = std::move(graph);
    lp.desc = std::move(desc);
  }
  if (with_interpolation) {
    for (std::size_t l = 1; l < cfg.levels(); ++l)
      plan.levels[l].to_level1 = std::make_shared<InterpolationPlan>(
          plan_interpolation(plan.levels[0].coords, plan.levels[l].coords));
  }
  return plan;
}

// Indices of the level-1 rows in the input cloud; identity when level 1 ran
// on the full cloud. Per-point outputs (segmentation logits) align with
// these rows, so per-point labels must be gathered through them.
inline std::vector<std::size_t> level1_indices(const CloudPlan& plan) {
  const LevelPlan& lp = plan.levels.front();
  if (!lp.selection.indices.empty()) return lp.selection.indices;
  std::vector<std::size_t> idx(lp.coords.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return idx;
}

struct EncoderLevelOut {
  Tape::NodeId features = kNoNode;
  std::size_t points = 0;
  std::size_t width = 0;
};

// Hierarchical encoder: level 1 runs the input recipe on the full-resolution
// Eigen-Graph; deeper levels downsample, rebuild the graph on the sampled
// coordinates, and group the previous level's features in both spaces.
inline std::vector<EncoderLevelOut> encoder_forward(Tape& tape, const CloudPlan& plan,
                                                    const GscConfig& cfg,
                                                    const BoundParams& params) {
  std::vector<EncoderLevelOut> out(cfg.levels());
  for (std::size_t l = 0; l < cfg.levels(); ++l) {
    const LevelPlan& lp = plan.levels[l];
    Tape::NodeId features;
    if (l == 0) {
      RecipeBlocks blocks = input_recipe(lp.coords, lp.desc, lp.graph, cfg.recipe);
      Tape::NodeId eu = kNoNode, ei = kNoNode;
      if (cfg.branch != BranchMode::EiOnly) eu = tape.constant(std::move(blocks.eu));
      if (cfg.branch != BranchMode::EuOnly) ei = tape.constant(std::move(blocks.ei));
      features = gsc_from_blocks(tape, eu, cfg.k1, ei, cfg.k2, cfg, params, 0);
    } else {
      Tape::NodeId prev = out[l - 1].features;
      const Tape::NodeId sampled = tape.gather_rows(
          prev, std::vector<std::size_t>(lp.selection.indices.begin(), lp.selection.indices.end()));
      features = gsc_forward(tape, sampled, lp.graph, cfg, params, l);
    }
    out[l] = {features, lp.coords.size(), cfg.level_widths[l]};
  }
  return out;
}

// Per-level global max + average pooling, concatenation across levels, then
// the fully connected stack with dropout to class logits.
inline Tape::NodeId classify_head(Tape& tape, const std::vector<EncoderLevelOut>& levels,
                                  const GscConfig& cfg, const BoundParams& params,
                                  bool training, std::uint64_t dropout_seed) {
  if (levels.empty()) throw invalid_argument("classify_head: no encoder levels");
  std::vector<Tape::NodeId> pooled;
  pooled.reserve(2 * levels.size());
  for (const EncoderLevelOut& lvl : levels) {
    pooled.push_back(tape.max_pool_rows(lvl.features, lvl.points));
    pooled.push_back(tape.mean_pool_rows(lvl.features, lvl.points));
  }
  Tape::NodeId h = tape.concat_cols(pooled);
  for (std::size_t i = 0; i < cfg.head_hidden.size(); ++i) {
    const std::string base = "head.fc" + std::to_string(i);
    h = tape.relu(tape.bias_add(tape.linear(h, params.at(base + ".w")), params.at(base + ".b")));
    if (training && cfg.dropout_rate > 0.0)
      h = tape.dropout(h, cfg.dropout_rate, derive_seed(dropout_seed, i));
  }
  return tape.bias_add(tape.linear(h, params.at("head.out.w")), params.at("head.out.b"));
}

// Interpolate every level's features back to level-1 points, concatenate
// with the repeated category one-hot, and run the per-point MLP.
inline Tape::NodeId segment_head(Tape& tape, const CloudPlan& plan,
                                 const std::vector<EncoderLevelOut>& levels,
                                 const std::vector<double>& category_onehot,
                                 const GscConfig& cfg, const BoundParams& params) {
  if (cfg.part_count == 0)
    throw invalid_argument("segment_head: config has part_count 0");
  if (category_onehot.size() != cfg.class_count)
    throw invalid_argument("segment_head: one-hot length " +
                           std::to_string(category_onehot.size()) + " does not match " +
                           std::to_string(cfg.class_count) + " classes");
  const std::size_t n1 = levels[0].points;
  std::vector<Tape::NodeId> parts;
  parts.reserve(levels.size() + 1);
  for (std::size_t l = 0; l < levels.size(); ++l) {
    if (l == 0) {
      parts.push_back(levels[l].features);
    } else {
      if (!plan.levels[l].to_level1)
        throw invalid_argument("segment_head: cloud plan lacks interpolation plans "
                               "(plan_cloud with_interpolation=false)");
      parts.push_back(tape.interp_rows(levels[l].features, plan.levels[l].to_level1));
    }
  }
  Matrix onehot(n1, cfg.class_count);
  for (std::size_t r = 0; r < n1; ++r)
    for (std::size_t c = 0; c < cfg.class_count; ++c) onehot(r, c) = category_onehot[c];
  parts.push_back(tape.constant(std::move(onehot)));

  Tape::NodeId h = tape.concat_cols(parts);
  for (std::size_t i = 0; i < cfg.seg_hidden.size(); ++i) {
    const std::string base = "seg.fc" + std::to_string(i);
    h = tape.relu(tape.bias_add(tape.linear(h, params.at(base + ".w")), params.at(base + ".b")));
  }
  return tape.bias_add(tape.linear(h, params.at("seg.out.w")), params.at("seg.out.b"));
}

namespace detail {

inline void glorot_init(Matrix& w, Rng& rng) {
  const double limit = std::sqrt(6.0 / double(w.rows + w.cols));
  for (double& x : w.v) x = rng.uniform(-limit, limit);
}

inline void init_encoder_params(ParamStore& store, const GscConfig& cfg, Rng& rng) {
  for (std::size_t l = 0; l < cfg.levels(); ++l) {
    for (bool eu_branch : {true, false}) {
      if (eu_branch && cfg.branch == BranchMode::EiOnly) continue;
      if (!eu_branch && cfg.branch == BranchMode::EuOnly) continue;
      Matrix& w = store.create(level_param(l, eu_branch, "w0"), cfg.edge_width(l, eu_branch),
                               cfg.branch_out(l));
      glorot_init(w, rng);
      store.create(level_param(l, eu_branch, "b0"), 1, cfg.branch_out(l));
    }
  }
}

}  // namespace detail

inline ParamStore init_classifier_params(const GscConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  ParamStore store;
  Rng rng(derive_seed(seed, 0xC1A55));
  detail::init_encoder_params(store, cfg, rng);
  std::size_t in_w = cfg.head_input_width();
  for (std::size_t i = 0; i < cfg.head_hidden.size(); ++i) {
    Matrix& w = store.create("head.fc" + std::to_string(i) + ".w", in_w, cfg.head_hidden[i]);
    detail::glorot_init(w, rng);
    store.create("head.fc" + std::to_string(i) + ".b", 1, cfg.head_hidden[i]);
    in_w = cfg.head_hidden[i];
  }
  Matrix& w = store.create("head.out.w", in_w, cfg.class_count);
  detail::glorot_init(w, rng);
  store.create("head.out.b", 1, cfg.class_count);
  return store;
}

inline ParamStore init_segmenter_params(const GscConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (cfg.part_count == 0)
    throw invalid_argument("init_segmenter_params: config has part_count 0");
  ParamStore store;
  Rng rng(derive_seed(seed, 0x5E6));
  detail::init_encoder_params(store, cfg, rng);
  std::size_t in_w = cfg.seg_input_width();
  for (std::size_t i = 0; i < cfg.seg_hidden.size(); ++i) {
    Matrix& w = store.create("seg.fc" + std::to_string(i) + ".w", in_w, cfg.seg_hidden[i]);
    detail::glorot_init(w, rng);
    store.create("seg.fc" + std::to_string(i) + ".b", 1, cfg.seg_hidden[i]);
    in_w = cfg.seg_hidden[i];
  }
  Matrix& w = store.create("seg.out.w", in_w, cfg.part_count);
  detail::glorot_init(w, rng);
  store.create("seg.out.b", 1, cfg.part_count);
  return store;
}

// Classification logits for one planned cloud.
inline Tape::NodeId classifier_logits(Tape& tape, const CloudPlan& plan, const GscConfig& cfg,
                                      const BoundParams& params, bool training = false,
                                      std::uint64_t dropout_seed = 0) {
  const auto levels = encoder_forward(tape, plan, cfg, params);
  return classify_head(tape, levels, cfg, params, training, dropout_seed);
}

// Per-point part logits for one planned cloud (plan must carry interpolation).
inline Tape::NodeId segmenter_logits(Tape& tape, const CloudPlan& plan, const GscConfig& cfg,
                                     const BoundParams& params,
                                     const std::vector<double>& category_onehot) {
  const auto levels = encoder_forward(tape, plan, cfg, params);
  return segment_head(tape, plan, levels, category_onehot, cfg, params);
}

}  // namespace eg
