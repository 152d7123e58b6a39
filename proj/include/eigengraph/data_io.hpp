#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gsc_net.hpp"

namespace eg {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Point-cloud file formats
// ---------------------------------------------------------------------------

enum class CloudFormat { Xyz, Off, PlyAscii };

inline const char* to_string(CloudFormat f) {
  switch (f) {
    case CloudFormat::Xyz: return "xyz";
    case CloudFormat::Off: return "off";
    case CloudFormat::PlyAscii: return "ply";
  }
  return "?";
}

inline CloudFormat format_from_string(const std::string& s) {
  if (s == "xyz") return CloudFormat::Xyz;
  if (s == "off") return CloudFormat::Off;
  if (s == "ply") return CloudFormat::PlyAscii;
  throw invalid_argument("unknown cloud format '" + s + "' (expected xyz, off, or ply)");
}

inline CloudFormat format_from_path(const std::string& path) {
  const auto dot = path.rfind('.');
  if (dot != std::string::npos) {
    std::string ext = path.substr(dot + 1);
    for (char& c : ext) c = char(std::tolower(static_cast<unsigned char>(c)));
    if (ext == "xyz" || ext == "off" || ext == "ply") return format_from_string(ext);
  }
  throw invalid_argument("cannot infer cloud format from path '" + path + "'");
}

// Shortest decimal representation that parses back to the same double.
inline std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

namespace detail {

inline bool parse_double(const std::string& tok, double& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last;
}

inline std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> toks;
  std::istringstream ss(line);
  std::string t;
  while (ss >> t) toks.push_back(t);
  return toks;
}

inline Vec3 parse_vertex_line(const std::vector<std::string>& toks, std::size_t line_no,
                              bool exact_three) {
  if (toks.size() < 3 || (exact_three && toks.size() != 3))
    throw parse_error("expected 3 coordinates, got " + std::to_string(toks.size()), line_no);
  Vec3 p;
  for (std::size_t c = 0; c < 3; ++c)
    if (!parse_double(toks[c], p[c]))
      throw parse_error("cannot parse coordinate '" + toks[c] + "'", line_no);
  return p;
}

inline PointCloud read_xyz(std::istream& in) {
  PointCloud cloud;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto toks = split_ws(line);
    if (toks.empty()) continue;
    cloud.points.push_back(parse_vertex_line(toks, line_no, true));
  }
  if (cloud.size() == 0) throw data_error("XYZ file contains no points");
  return cloud;
}

inline PointCloud read_off(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> counts;
  while (std::getline(in, line)) {
    ++line_no;
    const auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (line_no == 1 || counts.empty()) {
      if (toks[0] == "OFF") {
        if (toks.size() > 1) counts.assign(toks.begin() + 1, toks.end());
        // else counts come on the next line
      } else if (toks[0].rfind("OFF", 0) == 0) {
        // header fused with the first count ("OFF123 10 0")
        counts.push_back(toks[0].substr(3));
        counts.insert(counts.end(), toks.begin() + 1, toks.end());
      } else if (line_no == 1) {
        throw parse_error("missing OFF header", line_no);
      } else {
        counts = toks;
      }
      if (!counts.empty()) break;
    }
  }
  if (counts.empty()) throw data_error("OFF file has no counts line");
  if (counts.size() < 2) throw parse_error("OFF counts line needs vertex and face counts", line_no);
  std::size_t n_vertices = 0;
  {
    double v;
    if (!parse_double(counts[0], v) || v < 0 || v != double(std::size_t(v)))
      throw parse_error("cannot parse OFF vertex count '" + counts[0] + "'", line_no);
    n_vertices = std::size_t(v);
  }
  if (n_vertices == 0) throw data_error("OFF file declares 0 vertices");
  PointCloud cloud;
  cloud.points.reserve(n_vertices);
  while (cloud.size() < n_vertices && std::getline(in, line)) {
    ++line_no;
    const auto toks = split_ws(line);
    if (toks.empty()) continue;
    cloud.points.push_back(parse_vertex_line(toks, line_no, false));
  }
  if (cloud.size() < n_vertices)
    throw parse_error("OFF file ends after " + std::to_string(cloud.size()) + " of " +
                          std::to_string(n_vertices) + " vertices",
                      line_no);
  return cloud;  // faces ignored
}

inline PointCloud read_ply_ascii(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line) || split_ws(line) != std::vector<std::string>{"ply"})
    throw parse_error("missing ply magic", 1);
  ++line_no;

  struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<std::string> properties;
  };
  std::vector<Element> elements;
  bool ascii = false;
  bool header_done = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks[0] == "comment") continue;
    if (toks[0] == "format") {
      if (toks.size() < 2 || toks[1] != "ascii")
        throw data_error("only ascii PLY is supported (line " + std::to_string(line_no) + ")");
      ascii = true;
    } else if (toks[0] == "element") {
      if (toks.size() != 3) throw parse_error("malformed element declaration", line_no);
      double cnt;
      if (!parse_double(toks[2], cnt) || cnt < 0)
        throw parse_error("cannot parse element count '" + toks[2] + "'", line_no);
      elements.push_back({toks[1], std::size_t(cnt), {}});
    } else if (toks[0] == "property") {
      if (elements.empty()) throw parse_error("property before any element", line_no);
      if (toks.size() >= 2 && toks[1] == "list") {
        if (elements.back().name == "vertex")
          throw data_error("list properties on the vertex element are not supported (line " +
                           std::to_string(line_no) + ")");
        elements.back().properties.push_back("list");
      } else {
        if (toks.size() != 3) throw parse_error("malformed property declaration", line_no);
        elements.back().properties.push_back(toks[2]);
      }
    } else if (toks[0] == "end_header") {
      header_done = true;
      break;
    } else {
      throw parse_error("unexpected header token '" + toks[0] + "'", line_no);
    }
  }
  if (!header_done) throw data_error("PLY header has no end_header");
  if (!ascii) throw data_error("PLY file does not declare an ascii format");

  PointCloud cloud;
  for (const Element& el : elements) {
    if (el.name != "vertex") {
      // skip this element's rows; they precede the vertices
      for (std::size_t r = 0; r < el.count; ++r) {
        if (!std::getline(in, line))
          throw parse_error("PLY ends inside element '" + el.name + "'", line_no);
        ++line_no;
      }
      continue;
    }
    if (el.count == 0) throw data_error("PLY file declares 0 vertices");
    std::ptrdiff_t ix = -1, iy = -1, iz = -1;
    for (std::size_t p = 0; p < el.properties.size(); ++p) {
      if (el.properties[p] == "x") ix = std::ptrdiff_t(p);
      if (el.properties[p] == "y") iy = std::ptrdiff_t(p);
      if (el.properties[p] == "z") iz = std::ptrdiff_t(p);
    }
    if (ix < 0 || iy < 0 || iz < 0)
      throw data_error("PLY vertex element lacks x/y/z properties");
    cloud.points.reserve(el.count);
    while (cloud.size() < el.count && std::getline(in, line)) {
      ++line_no;
      const auto toks = split_ws(line);
      if (toks.empty()) continue;
      if (toks.size() != el.properties.size())
        throw parse_error("vertex row has " + std::to_string(toks.size()) +
                              " values, header declares " + std::to_string(el.properties.size()),
                          line_no);
      Vec3 pt;
      if (!parse_double(toks[std::size_t(ix)], pt[0]) ||
          !parse_double(toks[std::size_t(iy)], pt[1]) ||
          !parse_double(toks[std::size_t(iz)], pt[2]))
        throw parse_error("cannot parse vertex coordinates", line_no);
      cloud.points.push_back(pt);
    }
    if (cloud.size() < el.count)
      throw parse_error("PLY ends after " + std::to_string(cloud.size()) + " of " +
                            std::to_string(el.count) + " vertices",
                        line_no);
    break;  // trailing elements (faces) ignored
  }
  if (cloud.size() == 0) throw data_error("PLY file contains no vertex element");
  return cloud;
}

}  // namespace detail

inline PointCloud read_cloud(std::istream& in, CloudFormat format) {
  PointCloud cloud;
  switch (format) {
    case CloudFormat::Xyz: cloud = detail::read_xyz(in); break;
    case CloudFormat::Off: cloud = detail::read_off(in); break;
    case CloudFormat::PlyAscii: cloud = detail::read_ply_ascii(in); break;
  }
  if (!is_finite(cloud)) throw data_error("cloud contains non-finite coordinates");
  return cloud;
}

inline PointCloud read_cloud(const std::string& path, CloudFormat format) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open '" + path + "' for reading");
  return read_cloud(in, format);
}

inline PointCloud read_cloud(const std::string& path) {
  return read_cloud(path, format_from_path(path));
}

inline void write_cloud(const PointCloud& cloud, std::ostream& out, CloudFormat format) {
  validate(cloud);
  switch (format) {
    case CloudFormat::Xyz:
      break;
    case CloudFormat::Off:
      out << "OFF\n" << cloud.size() << " 0 0\n";
      break;
    case CloudFormat::PlyAscii:
      out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size()
          << "\nproperty double x\nproperty double y\nproperty double z\nend_header\n";
      break;
  }
  for (const Vec3& p : cloud.points)
    out << format_double(p[0]) << ' ' << format_double(p[1]) << ' ' << format_double(p[2])
        << '\n';
}

inline void write_cloud(const PointCloud& cloud, const std::string& path, CloudFormat format) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot open '" + path + "' for writing");
  write_cloud(cloud, out, format);
  if (!out) throw data_error("failed while writing '" + path + "'");
}

// ---------------------------------------------------------------------------
// Synthetic labeled datasets
// ---------------------------------------------------------------------------

enum class ShapeKind { Sphere, Cube, Cylinder, Plane, Torus };

inline ShapeKind shape_from_string(const std::string& s) {
  if (s == "sphere") return ShapeKind::Sphere;
  if (s == "cube") return ShapeKind::Cube;
  if (s == "cylinder") return ShapeKind::Cylinder;
  if (s == "plane") return ShapeKind::Plane;
  if (s == "torus") return ShapeKind::Torus;
  throw invalid_argument("unknown shape '" + s +
                         "' (expected sphere, cube, cylinder, plane, or torus)");
}

// Uniform samples of the shape surface, in canonical orientation, unnormalized.
inline PointCloud sample_shape(ShapeKind kind, std::size_t n, Rng& rng) {
  PointCloud cloud;
  cloud.points.reserve(n);
  constexpr double two_pi = 6.283185307179586476925286766559;
  switch (kind) {
    case ShapeKind::Sphere: {
      while (cloud.size() < n) {
        const Vec3 g{rng.normal(), rng.normal(), rng.normal()};
        const double r = norm(g);
        if (r < 1e-12) continue;
        cloud.points.push_back((1.0 / r) * g);
      }
      break;
    }
    case ShapeKind::Cube: {
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t face = std::size_t(rng.below(6));
        const double u = rng.uniform(-1.0, 1.0), v = rng.uniform(-1.0, 1.0);
        const double s = face % 2 == 0 ? 1.0 : -1.0;
        switch (face / 2) {
          case 0: cloud.points.push_back({s, u, v}); break;
          case 1: cloud.points.push_back({u, s, v}); break;
          default: cloud.points.push_back({u, v, s}); break;
        }
      }
      break;
    }
    case ShapeKind::Cylinder: {
      const double radius = 0.6, half_h = 0.8;
      const double lateral = two_pi * radius * (2.0 * half_h);
      const double caps = two_pi * radius * radius;
      const double p_lateral = lateral / (lateral + caps);
      for (std::size_t i = 0; i < n; ++i) {
        const double theta = rng.uniform(0.0, two_pi);
        if (rng.uniform() < p_lateral) {
          cloud.points.push_back(
              {radius * std::cos(theta), radius * std::sin(theta), rng.uniform(-half_h, half_h)});
        } else {
          const double rho = radius * std::sqrt(rng.uniform());
          const double z = rng.below(2) == 0 ? half_h : -half_h;
          cloud.points.push_back({rho * std::cos(theta), rho * std::sin(theta), z});
        }
      }
      break;
    }
    case ShapeKind::Plane: {
      for (std::size_t i = 0; i < n; ++i)
        cloud.points.push_back({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), 0.0});
      break;
    }
    case ShapeKind::Torus: {
      const double ring = 0.7, tube = 0.3;
      while (cloud.size() < n) {
        const double u = rng.uniform(0.0, two_pi);
        const double v = rng.uniform(0.0, two_pi);
        // surface area density is proportional to ring + tube*cos(v)
        if (rng.uniform() * (ring + tube) > ring + tube * std::cos(v)) continue;
        const double w = ring + tube * std::cos(v);
        cloud.points.push_back({w * std::cos(u), w * std::sin(u), tube * std::sin(v)});
      }
      break;
    }
  }
  return cloud;
}

struct Sample {
  PointCloud cloud;
  int label = 0;
  std::vector<int> parts;  // per-point labels; empty for classification sets
};

struct LabeledCloudSet {
  std::vector<Sample> train, test;
  int class_count = 0;
  int part_count = 0;  // 0 for classification sets
  std::vector<std::string> class_names;
  std::vector<std::vector<int>> class_parts;  // part ids per class (segmentation)
  std::uint64_t seed = 0;
};

struct SynthSpec {
  std::vector<std::string> classes = {"sphere", "cube", "cylinder", "plane", "torus"};
  std::size_t n_points = 256;
  std::size_t per_class = 125;  // split 80/20 into train/test
  double noise_sigma = 0.01;
  std::uint64_t seed = 1;
};

namespace detail {

inline PointCloud finish_cloud(PointCloud cloud, double sigma, std::uint64_t jitter_seed) {
  cloud = normalize_unit_sphere(cloud);
  if (sigma > 0.0) cloud = jitter(cloud, sigma, 5.0 * sigma, jitter_seed);
  return cloud;
}

}  // namespace detail

// Balanced synthetic classification corpus: uniform surface samples per
// shape, unit-sphere normalized, jittered; 80/20 train/test split by seeded
// per-class shuffle. A pure function of its spec.
inline LabeledCloudSet synth_dataset(const SynthSpec& spec) {
  if (spec.n_points < 64)
    throw invalid_argument("synth_dataset: n_points must be >= 64 (got " +
                           std::to_string(spec.n_points) + ")");
  if (spec.classes.empty()) throw invalid_argument("synth_dataset: no classes");
  if (spec.per_class < 5)
    throw invalid_argument("synth_dataset: per_class must be >= 5 for an 80/20 split");
  LabeledCloudSet set;
  set.class_count = int(spec.classes.size());
  set.class_names = spec.classes;
  set.seed = spec.seed;
  const std::size_t n_train = spec.per_class * 4 / 5;
  for (std::size_t c = 0; c < spec.classes.size(); ++c) {
    const ShapeKind kind = shape_from_string(spec.classes[c]);
    std::vector<Sample> instances(spec.per_class);
    for (std::size_t t = 0; t < spec.per_class; ++t) {
      Rng rng(derive_seed(spec.seed, 0x10000000ULL + c * 1048576ULL + t));
      Sample s;
      s.cloud = detail::finish_cloud(sample_shape(kind, spec.n_points, rng), spec.noise_sigma,
                                     derive_seed(spec.seed, 0x20000000ULL + c * 1048576ULL + t));
      s.label = int(c);
      instances[t] = std::move(s);
    }
    std::vector<std::size_t> order(spec.per_class);
    for (std::size_t t = 0; t < spec.per_class; ++t) order[t] = t;
    Rng shuffle_rng(derive_seed(spec.seed, 0x30000000ULL + c));
    shuffle(order, shuffle_rng);
    for (std::size_t t = 0; t < spec.per_class; ++t) {
      auto& dst = t < n_train ? set.train : set.test;
      dst.push_back(std::move(instances[order[t]]));
    }
  }
  return set;
}

// Composite shapes with ground-truth part labels. Labels are assigned at
// sampling time (canonical orientation) and ride with their points through
// every later transform.
inline LabeledCloudSet synth_parts(const SynthSpec& spec) {
  if (spec.n_points < 64)
    throw invalid_argument("synth_parts: n_points must be >= 64 (got " +
                           std::to_string(spec.n_points) + ")");
  std::vector<std::string> classes = spec.classes;
  if (classes == SynthSpec{}.classes) classes = {"sphere-halves", "cylinder-capped"};
  LabeledCloudSet set;
  set.class_count = int(classes.size());
  set.class_names = classes;
  set.seed = spec.seed;
  const std::size_t n_train = spec.per_class * 4 / 5;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const int part_base = int(2 * c);
    set.class_parts.push_back({part_base, part_base + 1});
    std::vector<Sample> instances(spec.per_class);
    for (std::size_t t = 0; t < spec.per_class; ++t) {
      Rng rng(derive_seed(spec.seed, 0x40000000ULL + c * 1048576ULL + t));
      Sample s;
      s.label = int(c);
      s.parts.resize(spec.n_points);
      PointCloud raw;
      if (classes[c] == "sphere-halves") {
        raw = sample_shape(ShapeKind::Sphere, spec.n_points, rng);
        for (std::size_t i = 0; i < spec.n_points; ++i)
          s.parts[i] = raw[i][2] >= 0.0 ? part_base : part_base + 1;
      } else if (classes[c] == "cylinder-capped") {
        raw = sample_shape(ShapeKind::Cylinder, spec.n_points, rng);
        for (std::size_t i = 0; i < spec.n_points; ++i) {
          const bool on_cap = std::abs(std::abs(raw[i][2]) - 0.8) < 1e-12;
          s.parts[i] = on_cap ? part_base + 1 : part_base;
        }
      } else {
        throw invalid_argument("synth_parts: unknown composite shape '" + classes[c] + "'");
      }
      s.cloud = detail::finish_cloud(std::move(raw), spec.noise_sigma,
                                     derive_seed(spec.seed, 0x50000000ULL + c * 1048576ULL + t));
      instances[t] = std::move(s);
    }
    std::vector<std::size_t> order(spec.per_class);
    for (std::size_t t = 0; t < spec.per_class; ++t) order[t] = t;
    Rng shuffle_rng(derive_seed(spec.seed, 0x60000000ULL + c));
    shuffle(order, shuffle_rng);
    for (std::size_t t = 0; t < spec.per_class; ++t) {
      auto& dst = t < n_train ? set.train : set.test;
      dst.push_back(std::move(instances[order[t]]));
    }
  }
  set.part_count = int(2 * classes.size());
  return set;
}

// ---------------------------------------------------------------------------
// Rotation-augmentation protocols (train regime / test regime)
// ---------------------------------------------------------------------------

enum class Protocol { None, ZZ, ZS, SS, OS };

inline const char* to_string(Protocol p) {
  switch (p) {
    case Protocol::None: return "none";
    case Protocol::ZZ: return "z/z";
    case Protocol::ZS: return "z/s";
    case Protocol::SS: return "s/s";
    case Protocol::OS: return "0/s";
  }
  return "?";
}

inline Protocol protocol_from_string(const std::string& s) {
  if (s == "none") return Protocol::None;
  if (s == "z/z") return Protocol::ZZ;
  if (s == "z/s") return Protocol::ZS;
  if (s == "s/s") return Protocol::SS;
  if (s == "0/s") return Protocol::OS;
  throw invalid_argument("unknown protocol '" + s + "' (expected none, z/z, z/s, s/s, or 0/s)");
}

namespace detail {

enum class RotRegime { NoRotation, Z, S };

inline RotRegime train_regime(Protocol p) {
  switch (p) {
    case Protocol::ZZ:
    case Protocol::ZS: return RotRegime::Z;
    case Protocol::SS: return RotRegime::S;
    default: return RotRegime::NoRotation;
  }
}

inline RotRegime test_regime(Protocol p) {
  switch (p) {
    case Protocol::ZZ: return RotRegime::Z;
    case Protocol::ZS:
    case Protocol::SS:
    case Protocol::OS: return RotRegime::S;
    default: return RotRegime::NoRotation;
  }
}

inline void rotate_split(std::vector<Sample>& samples, RotRegime regime, std::uint64_t seed,
                         std::uint64_t stream_base) {
  if (regime == RotRegime::NoRotation) return;
  const RotationAxes axes = regime == RotRegime::Z ? RotationAxes::Z : RotationAxes::EulerXYZ;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const RigidTransform t = random_rotation(axes, derive_seed(seed, stream_base + i));
    samples[i].cloud = apply_transform(samples[i].cloud, t);
  }
}

}  // namespace detail

inline LabeledCloudSet apply_protocol(const LabeledCloudSet& set, Protocol protocol,
                                      std::uint64_t seed) {
  LabeledCloudSet out = set;
  detail::rotate_split(out.train, detail::train_regime(protocol), seed, 0x70000000ULL);
  detail::rotate_split(out.test, detail::test_regime(protocol), seed, 0x80000000ULL);
  return out;
}

// ---------------------------------------------------------------------------
// JSON config / manifest / checkpoint
// ---------------------------------------------------------------------------

inline json config_to_json(const GscConfig& cfg) {
  return json{{"k1", cfg.k1},
              {"k2", cfg.k2},
              {"branch", to_string(cfg.branch)},
              {"recipe", to_string(cfg.recipe)},
              {"fps", cfg.use_fps},
              {"level_sizes", cfg.level_sizes},
              {"level_widths", cfg.level_widths},
              {"head_hidden", cfg.head_hidden},
              {"dropout_rate", cfg.dropout_rate},
              {"class_count", cfg.class_count},
              {"part_count", cfg.part_count},
              {"seg_hidden", cfg.seg_hidden}};
}

inline GscConfig config_from_json(const json& j) {
  GscConfig cfg;
  try {
    if (j.contains("k1")) cfg.k1 = j.at("k1").get<std::size_t>();
    if (j.contains("k2")) cfg.k2 = j.at("k2").get<std::size_t>();
    if (j.contains("branch")) cfg.branch = branch_from_string(j.at("branch").get<std::string>());
    if (j.contains("recipe")) cfg.recipe = recipe_from_string(j.at("recipe").get<std::string>());
    if (j.contains("fps")) cfg.use_fps = j.at("fps").get<bool>();
    if (j.contains("level_sizes"))
      cfg.level_sizes = j.at("level_sizes").get<std::vector<std::size_t>>();
    if (j.contains("level_widths"))
      cfg.level_widths = j.at("level_widths").get<std::vector<std::size_t>>();
    if (j.contains("head_hidden"))
      cfg.head_hidden = j.at("head_hidden").get<std::vector<std::size_t>>();
    if (j.contains("dropout_rate")) cfg.dropout_rate = j.at("dropout_rate").get<double>();
    if (j.contains("class_count")) cfg.class_count = j.at("class_count").get<std::size_t>();
    if (j.contains("part_count")) cfg.part_count = j.at("part_count").get<std::size_t>();
    if (j.contains("seg_hidden"))
      cfg.seg_hidden = j.at("seg_hidden").get<std::vector<std::size_t>>();
  } catch (const json::exception& e) {
    throw data_error(std::string("malformed config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

inline json synth_spec_to_json(const SynthSpec& s) {
  return json{{"classes", s.classes},
              {"n_points", s.n_points},
              {"per_class", s.per_class},
              {"noise_sigma", s.noise_sigma},
              {"seed", s.seed}};
}

inline SynthSpec synth_spec_from_json(const json& j) {
  SynthSpec s;
  try {
    if (j.contains("classes")) s.classes = j.at("classes").get<std::vector<std::string>>();
    if (j.contains("n_points")) s.n_points = j.at("n_points").get<std::size_t>();
    if (j.contains("per_class")) s.per_class = j.at("per_class").get<std::size_t>();
    if (j.contains("noise_sigma")) s.noise_sigma = j.at("noise_sigma").get<double>();
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw data_error(std::string("malformed dataset spec: ") + e.what());
  }
  return s;
}

struct TrainSpec {
  std::size_t epochs = 30;
  std::size_t batch_size = 16;
  OptimizerConfig optimizer;
  std::uint64_t seed = 1;
  double target_accuracy = 0.0;  // > 0: stop once test accuracy reaches it
};

inline json train_spec_to_json(const TrainSpec& t) {
  return json{{"epochs", t.epochs},
              {"batch_size", t.batch_size},
              {"optimizer", t.optimizer.kind == OptimizerConfig::Kind::Adam ? "adam" : "sgd"},
              {"lr", t.optimizer.lr},
              {"momentum", t.optimizer.momentum},
              {"seed", t.seed},
              {"target_accuracy", t.target_accuracy}};
}

inline TrainSpec train_spec_from_json(const json& j) {
  TrainSpec t;
  try {
    if (j.contains("epochs")) t.epochs = j.at("epochs").get<std::size_t>();
    if (j.contains("batch_size")) t.batch_size = j.at("batch_size").get<std::size_t>();
    if (j.contains("optimizer")) {
      const std::string kind = j.at("optimizer").get<std::string>();
      if (kind == "adam") t.optimizer.kind = OptimizerConfig::Kind::Adam;
      else if (kind == "sgd") t.optimizer.kind = OptimizerConfig::Kind::SgdMomentum;
      else throw invalid_argument("unknown optimizer '" + kind + "' (expected adam or sgd)");
    }
    if (j.contains("lr")) t.optimizer.lr = j.at("lr").get<double>();
    if (j.contains("momentum")) t.optimizer.momentum = j.at("momentum").get<double>();
    if (j.contains("seed")) t.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("target_accuracy")) t.target_accuracy = j.at("target_accuracy").get<double>();
  } catch (const json::exception& e) {
    throw data_error(std::string("malformed train spec: ") + e.what());
  }
  return t;
}

inline constexpr int kManifestVersion = 1;

struct ExperimentManifest {
  int version = kManifestVersion;
  std::string task = "classification";  // or "segmentation"
  SynthSpec dataset;
  bool parts = false;
  Protocol protocol = Protocol::None;
  std::uint64_t protocol_seed = 7;
  GscConfig config;
  TrainSpec train;
};

inline json manifest_to_json(const ExperimentManifest& m) {
  return json{{"version", m.version},
              {"task", m.task},
              {"dataset", synth_spec_to_json(m.dataset)},
              {"parts", m.parts},
              {"protocol", to_string(m.protocol)},
              {"protocol_seed", m.protocol_seed},
              {"config", config_to_json(m.config)},
              {"train", train_spec_to_json(m.train)}};
}

inline ExperimentManifest manifest_from_json(const json& j) {
  ExperimentManifest m;
  try {
    if (!j.contains("version")) throw data_error("manifest lacks a version field");
    m.version = j.at("version").get<int>();
    if (m.version != kManifestVersion)
      throw data_error("unsupported manifest version " + std::to_string(m.version));
    if (j.contains("task")) m.task = j.at("task").get<std::string>();
    if (m.task != "classification" && m.task != "segmentation")
      throw data_error("unknown task '" + m.task + "'");
    if (j.contains("dataset")) m.dataset = synth_spec_from_json(j.at("dataset"));
    if (j.contains("parts")) m.parts = j.at("parts").get<bool>();
    if (m.task == "segmentation") m.parts = true;
    if (j.contains("protocol"))
      m.protocol = protocol_from_string(j.at("protocol").get<std::string>());
    if (j.contains("protocol_seed")) m.protocol_seed = j.at("protocol_seed").get<std::uint64_t>();
    if (j.contains("config")) m.config = config_from_json(j.at("config"));
    if (j.contains("train")) m.train = train_spec_from_json(j.at("train"));
  } catch (const json::exception& e) {
    throw data_error(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

inline ExperimentManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open manifest '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw data_error("manifest '" + path + "' is not valid JSON: " + e.what());
  }
  return manifest_from_json(j);
}

// Builds the manifest's dataset and applies its protocol.
inline LabeledCloudSet realize_dataset(const ExperimentManifest& m) {
  LabeledCloudSet set = m.parts ? synth_parts(m.dataset) : synth_dataset(m.dataset);
  return apply_protocol(set, m.protocol, m.protocol_seed);
}

inline constexpr int kCheckpointVersion = 1;

inline json checkpoint_to_json(const GscConfig& cfg, const ParamStore& params,
                               const std::string& kind) {
  json p = json::object();
  for (const auto& [name, entry] : params.entries())
    p[name] = json{{"rows", entry.value.rows}, {"cols", entry.value.cols},
                   {"data", entry.value.v}};
  return json{{"version", kCheckpointVersion},
              {"kind", kind},
              {"config", config_to_json(cfg)},
              {"params", p}};
}

inline void save_checkpoint(const std::string& path, const GscConfig& cfg,
                            const ParamStore& params, const std::string& kind) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot open checkpoint '" + path + "' for writing");
  out << checkpoint_to_json(cfg, params, kind) << '\n';
  if (!out) throw data_error("failed while writing checkpoint '" + path + "'");
}

struct Checkpoint {
  GscConfig config;
  ParamStore params;
  std::string kind;
};

// Loads and validates a checkpoint: every parameter must exist with exactly
// the shape the config dictates.
inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open checkpoint '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw data_error("checkpoint '" + path + "' is not valid JSON: " + e.what());
  }
  Checkpoint ck;
  try {
    if (j.at("version").get<int>() != kCheckpointVersion)
      throw data_error("unsupported checkpoint version");
    ck.kind = j.at("kind").get<std::string>();
    ck.config = config_from_json(j.at("config"));
    const ParamStore expected = ck.kind == "segmenter"
                                    ? init_segmenter_params(ck.config, 0)
                                    : init_classifier_params(ck.config, 0);
    const json& p = j.at("params");
    for (const auto& [name, entry] : expected.entries()) {
      if (!p.contains(name))
        throw invalid_argument("checkpoint is missing parameter '" + name + "'");
      const json& pj = p.at(name);
      const std::size_t rows = pj.at("rows").get<std::size_t>();
      const std::size_t cols = pj.at("cols").get<std::size_t>();
      if (rows != entry.value.rows || cols != entry.value.cols)
        throw invalid_argument("checkpoint parameter '" + name + "' has shape [" +
                               std::to_string(rows) + "," + std::to_string(cols) +
                               "], expected [" + std::to_string(entry.value.rows) + "," +
                               std::to_string(entry.value.cols) + "]");
      Matrix& m = ck.params.create(name, rows, cols);
      const auto data = pj.at("data").get<std::vector<double>>();
      if (data.size() != m.v.size())
        throw invalid_argument("checkpoint parameter '" + name + "' has " +
                               std::to_string(data.size()) + " values, expected " +
                               std::to_string(m.v.size()));
      m.v = data;
    }
    for (auto it = p.begin(); it != p.end(); ++it)
      if (!expected.entries().count(it.key()))
        throw invalid_argument("checkpoint has unexpected parameter '" + it.key() + "'");
  } catch (const json::exception& e) {
    throw data_error(std::string("malformed checkpoint: ") + e.what());
  }
  return ck;
}

}  // namespace eg
