// egnet: command-line front end for the eigengraph library. Every subcommand
// is deterministic given identical flags and seeds, and every output carries
// a header with the fully resolved configuration.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "eigengraph/trainer.hpp"

namespace fs = std::filesystem;
using eg::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

std::size_t resolve_threads(std::size_t cli_threads) {
  // Caps the worker count; computations are currently serial, so any cap
  // yields identical results.
  if (cli_threads > 0) return cli_threads;
  if (const char* env = std::getenv("EGNET_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return std::size_t(v);
  }
  return 1;
}

json run_header(const std::string& command, const json& flags) {
  return json{{"type", "header"}, {"command", command}, {"flags", flags}};
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw eg::data_error("cannot open '" + path + "' for writing");
  return out;
}

struct DescriptorsArgs {
  std::string input, out, format = "csv";
  std::size_t k1 = 20, k2 = 0;
};

void cmd_descriptors(const DescriptorsArgs& a) {
  const eg::PointCloud cloud = eg::read_cloud(a.input);
  eg::validate(cloud);
  const eg::EigenDescriptorSet desc = eg::eigen_descriptors(cloud, a.k1);
  eg::IndexMatrix eig_idx;
  if (a.k2 > 0) eig_idx = eg::knn_eigen(desc, a.k2);

  const json header = run_header(
      "descriptors",
      {{"input", a.input}, {"k1", a.k1}, {"k2", a.k2}, {"format", a.format}, {"out", a.out}});
  std::ofstream out = open_out(a.out);
  if (a.format == "csv") {
    out << "# " << header << '\n';
    out << "index,l1,l2,l3";
    for (std::size_t j = 0; j < a.k2; ++j) out << ",eig_nbr_" << j;
    out << '\n';
    for (std::size_t i = 0; i < desc.size(); ++i) {
      out << i << ',' << eg::format_double(desc.lambdas[i][0]) << ','
          << eg::format_double(desc.lambdas[i][1]) << ','
          << eg::format_double(desc.lambdas[i][2]);
      for (std::size_t j = 0; j < a.k2; ++j) out << ',' << eig_idx.at(i, j);
      out << '\n';
    }
  } else if (a.format == "jsonl") {
    out << header << '\n';
    for (std::size_t i = 0; i < desc.size(); ++i) {
      json rec{{"index", i}, {"lambda", desc.lambdas[i]}};
      if (a.k2 > 0) {
        const auto row = eig_idx.row(i);
        rec["eig_neighbors"] = std::vector<std::size_t>(row.begin(), row.end());
      }
      out << rec << '\n';
    }
  } else {
    throw eg::invalid_argument("unknown format '" + a.format + "' (expected csv or jsonl)");
  }
}

struct KnnArgs {
  std::string input, out;
  std::size_t k1 = 20, k2 = 20;
};

void cmd_knn(const KnnArgs& a) {
  const eg::PointCloud cloud = eg::read_cloud(a.input);
  eg::validate(cloud);
  const auto [graph, desc] = eg::build_graph(cloud, a.k1, a.k2);
  std::ofstream out = open_out(a.out);
  out << run_header("knn",
                    {{"input", a.input}, {"k1", a.k1}, {"k2", a.k2}, {"out", a.out}})
      << '\n';
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto eu = graph.euclid.row(i);
    const auto ei = graph.eigen.row(i);
    out << json{{"index", i},
                {"lambda", desc.lambdas[i]},
                {"euclid", std::vector<std::size_t>(eu.begin(), eu.end())},
                {"eigen", std::vector<std::size_t>(ei.begin(), ei.end())}}
        << '\n';
  }
}

struct FpsArgs {
  std::string input, out, out_cloud;
  std::size_t m = 0, seed_index = 0;
};

void cmd_fps(const FpsArgs& a) {
  const eg::PointCloud cloud = eg::read_cloud(a.input);
  eg::validate(cloud);
  const eg::SampleSelection sel = eg::fps(cloud, a.m, a.seed_index);
  json doc{{"header", run_header("fps", {{"input", a.input},
                                         {"m", a.m},
                                         {"seed_index", a.seed_index},
                                         {"out", a.out}})},
           {"indices", sel.indices}};
  if (a.out.empty()) {
    std::cout << doc << '\n';
  } else {
    open_out(a.out) << doc << '\n';
  }
  if (!a.out_cloud.empty())
    eg::write_cloud(eg::gather(cloud, sel), a.out_cloud, eg::format_from_path(a.out_cloud));
}

struct SynthArgs {
  std::string manifest, out_dir;
  std::string classes, protocol;
  int n_points = -1, per_class = -1;
  double noise = -1.0;
  long long seed = -1, protocol_seed = -1;
  bool parts = false;
};

eg::ExperimentManifest resolve_manifest(const std::string& path) {
  if (path.empty()) return {};
  return eg::load_manifest(path);
}

void cmd_synth(const SynthArgs& a) {
  eg::ExperimentManifest m = resolve_manifest(a.manifest);
  if (!a.classes.empty()) m.dataset.classes = split_csv(a.classes);
  if (a.n_points >= 0) m.dataset.n_points = std::size_t(a.n_points);
  if (a.per_class >= 0) m.dataset.per_class = std::size_t(a.per_class);
  if (a.noise >= 0.0) m.dataset.noise_sigma = a.noise;
  if (a.seed >= 0) m.dataset.seed = std::uint64_t(a.seed);
  if (!a.protocol.empty()) m.protocol = eg::protocol_from_string(a.protocol);
  if (a.protocol_seed >= 0) m.protocol_seed = std::uint64_t(a.protocol_seed);
  if (a.parts) m.parts = true;

  const eg::LabeledCloudSet set = eg::realize_dataset(m);
  fs::create_directories(fs::path(a.out_dir) / "train");
  fs::create_directories(fs::path(a.out_dir) / "test");

  json index{{"header", run_header("synth", {{"manifest", a.manifest},
                                             {"out_dir", a.out_dir},
                                             {"dataset", eg::synth_spec_to_json(m.dataset)},
                                             {"parts", m.parts},
                                             {"protocol", eg::to_string(m.protocol)},
                                             {"protocol_seed", m.protocol_seed}})},
             {"class_names", set.class_names},
             {"class_count", set.class_count},
             {"part_count", set.part_count}};
  for (const char* split : {"train", "test"}) {
    const auto& samples = std::string(split) == "train" ? set.train : set.test;
    json entries = json::array();
    for (std::size_t i = 0; i < samples.size(); ++i) {
      char name[64];
      std::snprintf(name, sizeof(name), "cloud_%04zu.xyz", i);
      const std::string rel = std::string(split) + "/" + name;
      eg::write_cloud(samples[i].cloud, (fs::path(a.out_dir) / rel).string(),
                      eg::CloudFormat::Xyz);
      json e{{"file", rel}, {"label", samples[i].label}};
      if (!samples[i].parts.empty()) e["parts"] = samples[i].parts;
      entries.push_back(std::move(e));
    }
    index[split] = std::move(entries);
  }
  open_out((fs::path(a.out_dir) / "index.json").string()) << index.dump(1) << '\n';
}

json metrics_to_json(const eg::EvalMetrics& m, bool segmentation) {
  json j{{"accuracy", m.accuracy},
         {"per_class_accuracy", m.per_class_accuracy},
         {"count", m.count}};
  if (segmentation) {
    j["instance_miou"] = m.instance_miou;
    j["class_miou"] = m.class_miou;
  }
  return j;
}

struct TrainArgs {
  std::string manifest, out_dir;
};

void cmd_train(const TrainArgs& a) {
  const eg::ExperimentManifest m = eg::load_manifest(a.manifest);
  const eg::LabeledCloudSet set = eg::realize_dataset(m);
  fs::create_directories(a.out_dir);

  const json header =
      run_header("train", {{"manifest", a.manifest},
                           {"out_dir", a.out_dir},
                           {"resolved", eg::manifest_to_json(m)}});
  open_out((fs::path(a.out_dir) / "resolved_manifest.json").string())
      << eg::manifest_to_json(m).dump(1) << '\n';

  std::ofstream log = open_out((fs::path(a.out_dir) / "log.jsonl").string());
  log << header << '\n';
  eg::TrainHooks hooks;
  hooks.on_step = [&](const eg::StepStats& s) {
    log << json{{"type", "step"},
                {"step", s.step},
                {"loss", s.loss},
                {"accuracy", s.accuracy},
                {"lr", s.lr},
                {"wall_ms", s.wall_ms}}
        << '\n';
  };
  hooks.on_epoch = [&](const eg::EpochStats& e) {
    log << json{{"type", "epoch"},
                {"epoch", e.epoch},
                {"train_loss", e.train_loss},
                {"train_accuracy", e.train_accuracy},
                {"test_accuracy", e.test_accuracy},
                {"wall_ms", e.wall_ms}}
        << '\n';
  };

  const bool segmentation = m.task == "segmentation";
  const eg::TrainResult result = segmentation
                                     ? eg::train_segmenter(set, m.config, m.train, hooks)
                                     : eg::train_classifier(set, m.config, m.train, hooks);
  eg::save_checkpoint((fs::path(a.out_dir) / "checkpoint.json").string(), m.config,
                      result.params, segmentation ? "segmenter" : "classifier");

  eg::EvalMetrics metrics;
  if (segmentation) {
    metrics = eg::evaluate_segmenter(set.test, eg::detail::plan_all(set.test, m.config, true),
                                     m.config, result.params, set.class_parts);
  } else {
    metrics = eg::evaluate_classifier(set.test, m.config, result.params);
  }
  json out{{"header", header},
           {"epochs_run", result.history.size()},
           {"metrics", metrics_to_json(metrics, segmentation)}};
  open_out((fs::path(a.out_dir) / "metrics.json").string()) << out.dump(1) << '\n';
  std::cout << out << '\n';
}

struct EvalArgs {
  std::string checkpoint, manifest, split = "test";
};

void cmd_eval(const EvalArgs& a) {
  const eg::Checkpoint ck = eg::load_checkpoint(a.checkpoint);
  const eg::ExperimentManifest m = eg::load_manifest(a.manifest);
  const eg::LabeledCloudSet set = eg::realize_dataset(m);
  if (a.split != "train" && a.split != "test")
    throw eg::invalid_argument("unknown split '" + a.split + "' (expected train or test)");
  const auto& samples = a.split == "train" ? set.train : set.test;

  const bool segmentation = ck.kind == "segmenter";
  eg::EvalMetrics metrics;
  if (segmentation) {
    metrics = eg::evaluate_segmenter(samples, eg::detail::plan_all(samples, ck.config, true),
                                     ck.config, ck.params, set.class_parts);
  } else {
    metrics = eg::evaluate_classifier(samples, ck.config, ck.params);
  }
  std::cout << json{{"header", run_header("eval", {{"checkpoint", a.checkpoint},
                                                   {"manifest", a.manifest},
                                                   {"split", a.split}})},
                    {"kind", ck.kind},
                    {"metrics", metrics_to_json(metrics, segmentation)}}
            << '\n';
}

struct RobustnessArgs {
  std::string manifest, out;
  std::string protocols = "z/z,z/s,s/s,0/s";
  std::string recipes = "coord-6,coord-eig-dist-13,eigen-6";
  bool pretty = false;
};

void cmd_robustness(const RobustnessArgs& a) {
  const eg::ExperimentManifest m = eg::load_manifest(a.manifest);
  std::vector<eg::Protocol> protocols;
  for (const std::string& p : split_csv(a.protocols))
    protocols.push_back(eg::protocol_from_string(p));
  if (protocols.empty()) throw eg::invalid_argument("no protocols given");
  std::vector<eg::InputRecipe> recipes;
  for (const std::string& r : split_csv(a.recipes))
    recipes.push_back(eg::recipe_from_string(r));
  if (recipes.empty()) throw eg::invalid_argument("no recipes given");

  const auto rows = eg::robustness_experiment(m, recipes, protocols);

  json jrows = json::array();
  for (const auto& row : rows)
    jrows.push_back(json{{"recipe", eg::to_string(row.recipe)}, {"accuracy", row.accuracy}});
  const json doc{{"header", run_header("robustness", {{"manifest", a.manifest},
                                                      {"protocols", a.protocols},
                                                      {"recipes", a.recipes}})},
                 {"rows", jrows}};
  if (a.out.empty()) {
    std::cout << doc << '\n';
  } else {
    open_out(a.out) << doc << '\n';
  }
  if (a.pretty) {
    std::ostringstream table;
    table << "recipe";
    for (const auto& p : protocols) table << '\t' << eg::to_string(p);
    table << '\n';
    for (const auto& row : rows) {
      table << eg::to_string(row.recipe);
      for (const auto& p : protocols) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%.1f", 100.0 * row.accuracy.at(eg::to_string(p)));
        table << '\t' << buf;
      }
      table << '\n';
    }
    std::cout << table.str();
  }
}

struct GradcheckArgs {
  std::string config, task = "classification";
  double tolerance = 1e-4;
};

void cmd_gradcheck(const GradcheckArgs& a) {
  eg::GscConfig cfg;
  if (!a.config.empty()) {
    std::ifstream in(a.config);
    if (!in) throw eg::data_error("cannot open config '" + a.config + "'");
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw eg::data_error("config '" + a.config + "' is not valid JSON: " + e.what());
    }
    cfg = eg::config_from_json(j);
  } else {
    cfg.k1 = 4;
    cfg.k2 = 4;
    cfg.level_sizes = {24, 12};
    cfg.level_widths = {8, 8};
    cfg.head_hidden = {12};
    cfg.class_count = 3;
    cfg.dropout_rate = 0.0;
    if (a.task == "segmentation") {
      cfg.part_count = 4;
      cfg.seg_hidden = {10};
    }
  }
  const bool segmentation = a.task == "segmentation";
  if (!segmentation && a.task != "classification")
    throw eg::invalid_argument("unknown task '" + a.task +
                               "' (expected classification or segmentation)");

  // Tiny fixed batch of shapes.
  eg::SynthSpec spec;
  spec.classes = segmentation ? std::vector<std::string>{"sphere-halves", "cylinder-capped"}
                              : std::vector<std::string>{"sphere", "plane", "torus"};
  spec.n_points = std::max<std::size_t>(cfg.level_sizes[0], 64);
  spec.per_class = 5;
  spec.noise_sigma = 0.02;
  spec.seed = 11;
  const eg::LabeledCloudSet set = segmentation ? eg::synth_parts(spec) : eg::synth_dataset(spec);
  if (segmentation) {
    eg::GscConfig c2 = cfg;
    c2.class_count = std::size_t(set.class_count);
    c2.part_count = std::size_t(set.part_count);
    cfg = c2;
  } else {
    cfg.class_count = std::size_t(set.class_count);
  }
  cfg.validate();

  std::vector<const eg::Sample*> batch;
  for (std::size_t c = 0; c < std::size_t(set.class_count); ++c)
    batch.push_back(&set.train[c * (spec.per_class * 4 / 5)]);
  std::vector<eg::CloudPlan> plans;
  for (const eg::Sample* s : batch)
    plans.push_back(eg::plan_cloud(s->cloud, cfg, 0, segmentation));

  auto forward = [&](const eg::ParamStore& params, bool want_grads) {
    double loss_total = 0.0;
    eg::GradMap grads;
    for (std::size_t b = 0; b < batch.size(); ++b) {
      eg::Tape tape;
      const eg::BoundParams bound = bind_params(tape, params);
      eg::Tape::NodeId loss;
      if (segmentation) {
        const auto logits =
            eg::segmenter_logits(tape, plans[b], cfg, bound,
                                 eg::detail::onehot_label(batch[b]->label, cfg.class_count));
        loss = tape.softmax_cross_entropy(
            logits, eg::detail::level1_parts(batch[b]->parts, plans[b]));
      } else {
        const auto logits = eg::classifier_logits(tape, plans[b], cfg, bound, false, 0);
        loss = tape.softmax_cross_entropy(logits, {batch[b]->label});
      }
      loss_total += tape.value(loss)(0, 0);
      if (want_grads) {
        tape.backward(loss);
        for (auto& [name, g] : collect_grads(tape, bound)) {
          auto [it, inserted] = grads.try_emplace(name, g);
          if (!inserted)
            for (std::size_t i = 0; i < it->second.v.size(); ++i) it->second.v[i] += g.v[i];
        }
      }
    }
    return std::make_pair(loss_total, std::move(grads));
  };

  eg::ParamStore params = segmentation ? eg::init_segmenter_params(cfg, 3)
                                       : eg::init_classifier_params(cfg, 3);
  const eg::GradCheckReport report = eg::grad_check(
      params, [&](const eg::ParamStore& p) { return forward(p, false).first; },
      [&](const eg::ParamStore& p) { return forward(p, true).second; }, a.tolerance);

  json jparams = json::array();
  for (const auto& pe : report.params)
    jparams.push_back(json{{"name", pe.name}, {"max_rel_err", pe.max_rel_err}});
  std::cout << json{{"header", run_header("gradcheck", {{"config", a.config},
                                                        {"task", a.task},
                                                        {"tolerance", a.tolerance}})},
                    {"passed", report.passed},
                    {"max_rel_err", report.max_rel_err},
                    {"params", jparams}}
            << '\n';
  if (!report.passed)
    throw eg::numeric_error("gradient check failed: max relative error " +
                            std::to_string(report.max_rel_err) + " exceeds tolerance " +
                            std::to_string(report.tolerance));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"eigengraph point-cloud toolkit"};
  app.require_subcommand(1);
  std::size_t threads = 0;
  app.add_option("--threads", threads, "cap on worker threads (0: use EGNET_THREADS or 1)");

  DescriptorsArgs da;
  auto* cd = app.add_subcommand("descriptors", "per-point structure-tensor eigenvalues");
  cd->add_option("--input", da.input, "input cloud (xyz/off/ply)")->required();
  cd->add_option("--k1", da.k1, "Euclidean neighbor count");
  cd->add_option("--k2", da.k2, "append this many eigen-space neighbor indices per point");
  cd->add_option("--format", da.format, "csv or jsonl");
  cd->add_option("--out", da.out, "output file")->required();

  KnnArgs ka;
  auto* ck = app.add_subcommand("knn", "dump the full Eigen-Graph as JSON lines");
  ck->add_option("--input", ka.input)->required();
  ck->add_option("--k1", ka.k1);
  ck->add_option("--k2", ka.k2);
  ck->add_option("--out", ka.out)->required();

  FpsArgs fa;
  auto* cf = app.add_subcommand("fps", "farthest-point sampling order");
  cf->add_option("--input", fa.input)->required();
  cf->add_option("--m", fa.m, "points to select")->required();
  cf->add_option("--seed-index", fa.seed_index, "starting index");
  cf->add_option("--out", fa.out, "JSON output (default: stdout)");
  cf->add_option("--out-cloud", fa.out_cloud, "also write the sampled cloud here");

  SynthArgs sa;
  auto* cs = app.add_subcommand("synth", "materialize a synthetic labeled dataset");
  cs->add_option("--manifest", sa.manifest, "base manifest (flags override)");
  cs->add_option("--out-dir", sa.out_dir)->required();
  cs->add_option("--classes", sa.classes, "comma-separated shape names");
  cs->add_option("--n-points", sa.n_points);
  cs->add_option("--per-class", sa.per_class);
  cs->add_option("--noise", sa.noise, "jitter sigma");
  cs->add_option("--seed", sa.seed);
  cs->add_option("--protocol", sa.protocol, "none, z/z, z/s, s/s, or 0/s");
  cs->add_option("--protocol-seed", sa.protocol_seed);
  cs->add_flag("--parts", sa.parts, "generate per-point part labels");

  TrainArgs ta;
  auto* ct = app.add_subcommand("train", "train a model from a manifest");
  ct->add_option("--manifest", ta.manifest)->required();
  ct->add_option("--out-dir", ta.out_dir)->required();

  EvalArgs ea;
  auto* ce = app.add_subcommand("eval", "evaluate a checkpoint on a manifest's dataset");
  ce->add_option("--checkpoint", ea.checkpoint)->required();
  ce->add_option("--manifest", ea.manifest)->required();
  ce->add_option("--split", ea.split, "train or test (default test)");

  RobustnessArgs ra;
  auto* cr = app.add_subcommand("robustness", "train/eval across rotation protocols");
  cr->add_option("--manifest", ra.manifest)->required();
  cr->add_option("--protocols", ra.protocols, "comma-separated protocol list");
  cr->add_option("--recipes", ra.recipes, "comma-separated recipe list");
  cr->add_option("--out", ra.out, "JSON output (default: stdout)");
  cr->add_flag("--pretty", ra.pretty, "also print an aligned text table");

  GradcheckArgs ga;
  auto* cg = app.add_subcommand("gradcheck", "finite-difference check of the full network");
  cg->add_option("--config", ga.config, "config JSON (default: small built-in)");
  cg->add_option("--task", ga.task, "classification or segmentation");
  cg->add_option("--tolerance", ga.tolerance, "max relative error");

  try {
    app.parse(argc, argv);
    resolve_threads(threads);
    if (cd->parsed()) cmd_descriptors(da);
    if (ck->parsed()) cmd_knn(ka);
    if (cf->parsed()) cmd_fps(fa);
    if (cs->parsed()) cmd_synth(sa);
    if (ct->parsed()) cmd_train(ta);
    if (ce->parsed()) cmd_eval(ea);
    if (cr->parsed()) cmd_robustness(ra);
    if (cg->parsed()) cmd_gradcheck(ga);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const eg::numeric_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const eg::parse_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const eg::data_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const eg::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitOk;
}
