#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "data_io.hpp"

namespace eg {

struct EvalMetrics {
  double accuracy = 0.0;
  std::vector<double> per_class_accuracy;
  std::vector<std::size_t> per_class_count;
  double instance_miou = 0.0;  // segmentation only
  double class_miou = 0.0;     // segmentation only
  std::size_t count = 0;
};

struct StepStats {
  std::size_t step = 0;
  double loss = 0.0;
  double accuracy = 0.0;
  double lr = 0.0;
  double wall_ms = 0.0;
};

struct EpochStats {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  double wall_ms = 0.0;
};

struct TrainHooks {
  std::function<void(const StepStats&)> on_step;
  std::function<void(const EpochStats&)> on_epoch;
};

struct TrainResult {
  ParamStore params;
  std::vector<EpochStats> history;
  double final_test_accuracy = 0.0;
};

namespace detail {

inline std::size_t argmax_row(const Matrix& m, std::size_t row) {
  std::size_t best = 0;
  double best_v = m(row, 0);
  for (std::size_t c = 1; c < m.cols; ++c)
    if (m(row, c) > best_v) {
      best_v = m(row, c);
      best = c;
    }
  return best;
}

inline double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

inline void check_dataset(const LabeledCloudSet& set, const GscConfig& cfg, bool parts) {
  if (set.train.empty() && set.test.empty())
    throw invalid_argument("dataset has no samples");
  if (std::size_t(set.class_count) != cfg.class_count)
    throw invalid_argument("dataset has " + std::to_string(set.class_count) +
                           " classes but the config expects " +
                           std::to_string(cfg.class_count));
  if (parts && std::size_t(set.part_count) != cfg.part_count)
    throw invalid_argument("dataset has " + std::to_string(set.part_count) +
                           " parts but the config expects " + std::to_string(cfg.part_count));
}

inline std::vector<CloudPlan> plan_all(const std::vector<Sample>& samples, const GscConfig& cfg,
                                       bool with_interpolation) {
  std::vector<CloudPlan> plans;
  plans.reserve(samples.size());
  for (const Sample& s : samples)
    plans.push_back(plan_cloud(s.cloud, cfg, 0, with_interpolation));
  return plans;
}

inline std::vector<double> onehot_label(int label, std::size_t classes) {
  std::vector<double> v(classes, 0.0);
  v[std::size_t(label)] = 1.0;
  return v;
}

// Per-point labels aligned with the plan's level-1 rows.
inline std::vector<int> level1_parts(const std::vector<int>& parts, const CloudPlan& plan) {
  const std::vector<std::size_t> idx = level1_indices(plan);
  std::vector<int> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = parts[idx[i]];
  return out;
}

}  // namespace detail

inline EvalMetrics evaluate_classifier(const std::vector<Sample>& samples,
                                       const std::vector<CloudPlan>& plans,
                                       const GscConfig& cfg, const ParamStore& params) {
  EvalMetrics m;
  m.per_class_accuracy.assign(cfg.class_count, 0.0);
  m.per_class_count.assign(cfg.class_count, 0);
  m.count = samples.size();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    Tape tape;
    const BoundParams bound = bind_params(tape, params);
    const Tape::NodeId logits = classifier_logits(tape, plans[i], cfg, bound, false, 0);
    const std::size_t pred = detail::argmax_row(tape.value(logits), 0);
    const std::size_t label = std::size_t(samples[i].label);
    m.per_class_count[label] += 1;
    if (pred == label) {
      ++correct;
      m.per_class_accuracy[label] += 1.0;
    }
  }
  for (std::size_t c = 0; c < cfg.class_count; ++c)
    if (m.per_class_count[c] > 0) m.per_class_accuracy[c] /= double(m.per_class_count[c]);
  m.accuracy = samples.empty() ? 0.0 : double(correct) / double(samples.size());
  return m;
}

inline EvalMetrics evaluate_classifier(const std::vector<Sample>& samples, const GscConfig& cfg,
                                       const ParamStore& params) {
  return evaluate_classifier(samples, detail::plan_all(samples, cfg, false), cfg, params);
}

// Part predictions are restricted to the sample category's own part ids.
// Instance mIoU averages IoU over the category's parts (an absent part in
// both prediction and truth counts as IoU 1) and then over instances;
// class mIoU averages the instance values per class first.
inline EvalMetrics evaluate_segmenter(const std::vector<Sample>& samples,
                                      const std::vector<CloudPlan>& plans, const GscConfig& cfg,
                                      const ParamStore& params,
                                      const std::vector<std::vector<int>>& class_parts) {
  EvalMetrics m;
  m.count = samples.size();
  m.per_class_accuracy.assign(cfg.class_count, 0.0);
  m.per_class_count.assign(cfg.class_count, 0);
  std::size_t total_points = 0, correct_points = 0;
  std::vector<double> class_iou_sum(cfg.class_count, 0.0);
  double instance_iou_sum = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Sample& s = samples[i];
    Tape tape;
    const BoundParams bound = bind_params(tape, params);
    const Tape::NodeId logits = segmenter_logits(
        tape, plans[i], cfg, bound, detail::onehot_label(s.label, cfg.class_count));
    const Matrix& lv = tape.value(logits);
    const std::vector<int> truth = detail::level1_parts(s.parts, plans[i]);
    const std::vector<int>& allowed = class_parts.at(std::size_t(s.label));

    std::vector<int> pred(lv.rows);
    for (std::size_t r = 0; r < lv.rows; ++r) {
      int best = allowed[0];
      double best_v = lv(r, std::size_t(allowed[0]));
      for (int part : allowed)
        if (lv(r, std::size_t(part)) > best_v) {
          best_v = lv(r, std::size_t(part));
          best = part;
        }
      pred[r] = best;
      total_points += 1;
      if (best == truth[r]) correct_points += 1;
    }
    double iou_sum = 0.0;
    for (int part : allowed) {
      std::size_t inter = 0, uni = 0;
      for (std::size_t r = 0; r < lv.rows; ++r) {
        const bool in_pred = pred[r] == part;
        const bool in_gt = truth[r] == part;
        inter += (in_pred && in_gt) ? 1 : 0;
        uni += (in_pred || in_gt) ? 1 : 0;
      }
      iou_sum += uni == 0 ? 1.0 : double(inter) / double(uni);
    }
    const double instance_iou = iou_sum / double(allowed.size());
    instance_iou_sum += instance_iou;
    class_iou_sum[std::size_t(s.label)] += instance_iou;
    m.per_class_count[std::size_t(s.label)] += 1;
  }
  m.accuracy = total_points == 0 ? 0.0 : double(correct_points) / double(total_points);
  m.instance_miou = samples.empty() ? 0.0 : instance_iou_sum / double(samples.size());
  double class_sum = 0.0;
  std::size_t class_n = 0;
  for (std::size_t c = 0; c < cfg.class_count; ++c)
    if (m.per_class_count[c] > 0) {
      m.per_class_accuracy[c] = class_iou_sum[c] / double(m.per_class_count[c]);
      class_sum += m.per_class_accuracy[c];
      ++class_n;
    }
  m.class_miou = class_n == 0 ? 0.0 : class_sum / double(class_n);
  return m;
}

inline TrainResult train_classifier(const LabeledCloudSet& set, const GscConfig& cfg,
                                    const TrainSpec& spec, const TrainHooks& hooks = {}) {
  cfg.validate();
  detail::check_dataset(set, cfg, false);
  if (set.train.empty()) throw invalid_argument("train_classifier: no training samples");

  const std::vector<CloudPlan> train_plans = detail::plan_all(set.train, cfg, false);
  const std::vector<CloudPlan> test_plans = detail::plan_all(set.test, cfg, false);

  TrainResult result;
  result.params = init_classifier_params(cfg, spec.seed);

  std::vector<std::size_t> order(set.train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::size_t global_step = 0;
  for (std::size_t epoch = 0; epoch < spec.epochs; ++epoch) {
    const double epoch_start = detail::now_ms();
    Rng shuffle_rng(derive_seed(spec.seed, 0xE90C ^ (epoch * 2654435761ULL)));
    shuffle(order, shuffle_rng);

    double epoch_loss = 0.0, epoch_acc = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += spec.batch_size) {
      const std::size_t bsz = std::min(spec.batch_size, order.size() - start);
      const double step_start = detail::now_ms();
      const LossValue lv = train_step(
          bsz,
          [&](std::size_t s) {
            const std::size_t idx = order[start + s];
            Tape tape;
            const BoundParams bound = bind_params(tape, result.params);
            const Tape::NodeId logits = classifier_logits(
                tape, train_plans[idx], cfg, bound, true,
                derive_seed(spec.seed, 0xD50FULL + epoch * 16777259ULL + idx));
            const Tape::NodeId loss =
                tape.softmax_cross_entropy(logits, {set.train[idx].label});
            tape.backward(loss);
            SampleGrad sg;
            sg.loss = tape.value(loss)(0, 0);
            sg.correct = detail::argmax_row(tape.value(logits), 0) ==
                         std::size_t(set.train[idx].label);
            sg.grads = collect_grads(tape, bound);
            return sg;
          },
          result.params, spec.optimizer, global_step);
      epoch_loss += lv.loss;
      epoch_acc += lv.accuracy;
      ++batches;
      if (hooks.on_step)
        hooks.on_step({global_step, lv.loss, lv.accuracy, spec.optimizer.lr,
                       detail::now_ms() - step_start});
      ++global_step;
    }

    EpochStats es;
    es.epoch = epoch;
    es.train_loss = epoch_loss / double(batches);
    es.train_accuracy = epoch_acc / double(batches);
    es.test_accuracy =
        set.test.empty()
            ? 0.0
            : evaluate_classifier(set.test, test_plans, cfg, result.params).accuracy;
    es.wall_ms = detail::now_ms() - epoch_start;
    result.history.push_back(es);
    if (hooks.on_epoch) hooks.on_epoch(es);
    if (spec.target_accuracy > 0.0 && es.test_accuracy >= spec.target_accuracy) break;
  }
  result.final_test_accuracy = result.history.empty() ? 0.0 : result.history.back().test_accuracy;
  return result;
}

inline TrainResult train_segmenter(const LabeledCloudSet& set, const GscConfig& cfg,
                                   const TrainSpec& spec, const TrainHooks& hooks = {}) {
  cfg.validate();
  detail::check_dataset(set, cfg, true);
  if (set.train.empty()) throw invalid_argument("train_segmenter: no training samples");

  const std::vector<CloudPlan> train_plans = detail::plan_all(set.train, cfg, true);
  const std::vector<CloudPlan> test_plans = detail::plan_all(set.test, cfg, true);

  TrainResult result;
  result.params = init_segmenter_params(cfg, spec.seed);

  std::vector<std::size_t> order(set.train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::size_t global_step = 0;
  for (std::size_t epoch = 0; epoch < spec.epochs; ++epoch) {
    const double epoch_start = detail::now_ms();
    Rng shuffle_rng(derive_seed(spec.seed, 0x5E9C ^ (epoch * 2654435761ULL)));
    shuffle(order, shuffle_rng);

    double epoch_loss = 0.0, epoch_acc = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += spec.batch_size) {
      const std::size_t bsz = std::min(spec.batch_size, order.size() - start);
      const double step_start = detail::now_ms();
      const LossValue lv = train_step(
          bsz,
          [&](std::size_t s) {
            const std::size_t idx = order[start + s];
            const Sample& sample = set.train[idx];
            Tape tape;
            const BoundParams bound = bind_params(tape, result.params);
            const Tape::NodeId logits =
                segmenter_logits(tape, train_plans[idx], cfg, bound,
                                 detail::onehot_label(sample.label, cfg.class_count));
            const std::vector<int> truth = detail::level1_parts(sample.parts, train_plans[idx]);
            const Tape::NodeId loss = tape.softmax_cross_entropy(logits, truth);
            tape.backward(loss);
            SampleGrad sg;
            sg.loss = tape.value(loss)(0, 0);
            const Matrix& lvv = tape.value(logits);
            std::size_t hit = 0;
            for (std::size_t r = 0; r < lvv.rows; ++r)
              if (detail::argmax_row(lvv, r) == std::size_t(truth[r])) ++hit;
            sg.correct = 2 * hit >= lvv.rows;
            sg.grads = collect_grads(tape, bound);
            return sg;
          },
          result.params, spec.optimizer, global_step);
      epoch_loss += lv.loss;
      epoch_acc += lv.accuracy;
      ++batches;
      if (hooks.on_step)
        hooks.on_step({global_step, lv.loss, lv.accuracy, spec.optimizer.lr,
                       detail::now_ms() - step_start});
      ++global_step;
    }

    EpochStats es;
    es.epoch = epoch;
    es.train_loss = epoch_loss / double(batches);
    es.train_accuracy = epoch_acc / double(batches);
    es.test_accuracy = set.test.empty()
                           ? 0.0
                           : evaluate_segmenter(set.test, test_plans, cfg, result.params,
                                                set.class_parts)
                                 .accuracy;
    es.wall_ms = detail::now_ms() - epoch_start;
    result.history.push_back(es);
    if (hooks.on_epoch) hooks.on_epoch(es);
    if (spec.target_accuracy > 0.0 && es.test_accuracy >= spec.target_accuracy) break;
  }
  result.final_test_accuracy = result.history.empty() ? 0.0 : result.history.back().test_accuracy;
  return result;
}

// ---------------------------------------------------------------------------
// Rotation-robustness experiment: train each recipe arm once per distinct
// train regime, evaluate against every requested protocol's test side.
// ---------------------------------------------------------------------------

struct RobustnessRow {
  InputRecipe recipe = InputRecipe::CoordEigDist13;
  std::map<std::string, double> accuracy;  // protocol name -> test accuracy
};

inline std::vector<RobustnessRow> robustness_experiment(
    const ExperimentManifest& manifest, const std::vector<InputRecipe>& recipes,
    const std::vector<Protocol>& protocols, const TrainHooks& hooks = {}) {
  const LabeledCloudSet raw =
      manifest.parts ? synth_parts(manifest.dataset) : synth_dataset(manifest.dataset);
  std::vector<RobustnessRow> rows;
  for (const InputRecipe recipe : recipes) {
    GscConfig cfg = manifest.config;
    cfg.recipe = recipe;
    RobustnessRow row;
    row.recipe = recipe;
    std::map<int, ParamStore> trained;  // keyed by train regime
    for (const Protocol p : protocols) {
      const int regime = int(detail::train_regime(p));
      if (!trained.count(regime)) {
        const LabeledCloudSet arm = apply_protocol(raw, p, manifest.protocol_seed);
        trained.emplace(regime,
                        train_classifier(arm, cfg, manifest.train, hooks).params);
      }
      const LabeledCloudSet eval_set = apply_protocol(raw, p, manifest.protocol_seed);
      row.accuracy[to_string(p)] =
          evaluate_classifier(eval_set.test, cfg, trained.at(regime)).accuracy;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace eg
