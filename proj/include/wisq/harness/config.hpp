#pragma once

// Experiment configuration for the verification suites, read from JSON.
// Every field has a default, so "{}" is a complete configuration.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wisq/error.hpp"
#include "wisq/intrinsic.hpp"
#include "wisq/weights.hpp"

namespace wisq::harness {

struct WeightSpec {
  std::string kind = "constant";  // constant | power
  double value = 1.0;
  double a = 0.0;
  Point center{};

  Weight build(int n) const {
    if (kind == "constant") return Weight::constant(value, n);
    if (kind == "power") return Weight::power(a, center, n);
    throw InvalidArgument("unknown weight kind: " + kind);
  }
};

struct AtomSweepConfig {
  int count = 20;
  std::vector<double> scales = {0.25, 0.5, 1.0, 2.0, 4.0};  // cube sides, cycled
  std::uint64_t seed = 1;
  int points_per_axis = 64;  // atom grid over Q
  double q = 2.0;
  double center_spread = 4.0;  // centers drawn from r * U(-spread, spread) per axis
  std::string profile = "smooth_random";  // smooth_random | antisymmetric_sign | zero
};

struct OutputConfig {
  int points = 1024;         // evaluation grid points per axis
  double half_width = 32.0;  // evaluation window x0 +- half_width * r
};

struct DictionaryConfig {
  int size = 64;
  std::uint64_t seed = 7;
  int resolution = 1024;
};

struct ConeConfig {
  double t_min_cells = 2.0;    // t_min in atom-grid spacings
  double t_max_sides = 4.0;    // t_max in evaluation-window sides
  double ratio = 1.189207115002721;  // 2^{1/4}
  double y_cells_per_t = 8.0;
  int k_max = 6;
};

struct ExperimentConfig {
  int n = 1;
  double alpha = 0.5;
  std::optional<double> p_override;
  WeightSpec weight;
  AtomSweepConfig atoms;
  OutputConfig output;
  DictionaryConfig dictionary;
  ConeConfig cone;
  std::vector<double> lambdas = {4.5, 6.0};           // g* exponents
  std::vector<double> l2_ratio_lambdas = {1.5, 2.0, 4.0};
  double a1_threshold = 50.0;
  double family_side = 16.0;  // working domain of the A_1 screen and the doubling sweep
  int superposition_instances = 200;
  int stability_atoms = 5;    // atoms re-run under dictionary and grid doubling
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  unsigned threads = 0;

  double p() const { return p_override ? *p_override : double(n) / (double(n) + alpha); }

  Weight weight_function() const { return weight.build(n); }

  DictionaryOptions dictionary_options() const {
    DictionaryOptions o;
    o.dim = n;
    o.resolution = dictionary.resolution;
    return o;
  }

  void validate() const {
    require(n == 1 || n == 2, "ambient dimension must be 1 or 2");
    require(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0, 1]");
    require(p() > 0.0 && p() <= 1.0, "p must lie in (0, 1]");
    require(atoms.count >= 0 && !atoms.scales.empty(), "atom sweep needs scales");
    require(output.points >= 2 && output.half_width > 0.0, "evaluation window is degenerate");
    require(dictionary.size >= 1, "dictionary size must be at least 1");
    require(cone.ratio > 1.0 && cone.t_min_cells > 0.0 && cone.t_max_sides > 0.0, "cone parameters are degenerate");
    require(stability_atoms >= 0, "stability subset size must be nonnegative");
  }
};

inline Point point_from_json(const nlohmann::json& j) {
  Point p{};
  if (j.is_number()) {
    p[0] = j.get<double>();
    return p;
  }
  require(j.is_array() && j.size() >= 1 && j.size() <= 2, "points are arrays of 1 or 2 numbers");
  for (std::size_t k = 0; k < j.size(); ++k) p[k] = j[k].get<double>();
  return p;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  const auto get = [](const nlohmann::json& obj, const char* key, auto& field) {
    if (obj.contains(key)) field = obj.at(key).get<std::decay_t<decltype(field)>>();
  };
  get(j, "n", c.n);
  get(j, "alpha", c.alpha);
  // Canonical output carries the derived p too; p_derived marks it as informational.
  const bool derived = j.contains("p_derived") && j.at("p_derived").get<bool>();
  if (j.contains("p") && !j.at("p").is_null() && !derived) c.p_override = j.at("p").get<double>();
  if (j.contains("weight")) {
    const auto& w = j.at("weight");
    get(w, "kind", c.weight.kind);
    get(w, "value", c.weight.value);
    get(w, "a", c.weight.a);
    if (w.contains("center")) c.weight.center = point_from_json(w.at("center"));
  }
  if (j.contains("atoms")) {
    const auto& a = j.at("atoms");
    get(a, "count", c.atoms.count);
    get(a, "scales", c.atoms.scales);
    get(a, "seed", c.atoms.seed);
    get(a, "points_per_axis", c.atoms.points_per_axis);
    get(a, "q", c.atoms.q);
    get(a, "center_spread", c.atoms.center_spread);
    get(a, "profile", c.atoms.profile);
  }
  if (j.contains("output")) {
    get(j.at("output"), "points", c.output.points);
    get(j.at("output"), "half_width", c.output.half_width);
  }
  if (j.contains("dictionary")) {
    get(j.at("dictionary"), "size", c.dictionary.size);
    get(j.at("dictionary"), "seed", c.dictionary.seed);
    get(j.at("dictionary"), "resolution", c.dictionary.resolution);
  }
  if (j.contains("cone")) {
    const auto& k = j.at("cone");
    get(k, "t_min_cells", c.cone.t_min_cells);
    get(k, "t_max_sides", c.cone.t_max_sides);
    get(k, "ratio", c.cone.ratio);
    get(k, "y_cells_per_t", c.cone.y_cells_per_t);
    get(k, "k_max", c.cone.k_max);
  }
  get(j, "lambdas", c.lambdas);
  get(j, "l2_ratio_lambdas", c.l2_ratio_lambdas);
  get(j, "a1_threshold", c.a1_threshold);
  get(j, "family_side", c.family_side);
  get(j, "superposition_instances", c.superposition_instances);
  get(j, "stability_atoms", c.stability_atoms);
  get(j, "seed", c.seed);
  get(j, "out_dir", c.out_dir);
  get(j, "threads", c.threads);
  c.validate();
  return c;
}

/// Canonical JSON form; hashed into every report. Thread count is excluded (it never changes results).
inline nlohmann::ordered_json config_to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["n"] = c.n;
  j["alpha"] = c.alpha;
  j["p"] = c.p();
  j["p_derived"] = !c.p_override.has_value();
  nlohmann::ordered_json w;
  w["kind"] = c.weight.kind;
  if (c.weight.kind == "constant") {
    w["value"] = c.weight.value;
  } else {
    w["a"] = c.weight.a;
    w["center"] = c.n == 1 ? nlohmann::ordered_json::array({c.weight.center[0]})
                           : nlohmann::ordered_json::array({c.weight.center[0], c.weight.center[1]});
  }
  j["weight"] = w;
  j["atoms"] = {{"count", c.atoms.count},
                {"scales", c.atoms.scales},
                {"seed", c.atoms.seed},
                {"points_per_axis", c.atoms.points_per_axis},
                {"q", c.atoms.q},
                {"center_spread", c.atoms.center_spread},
                {"profile", c.atoms.profile}};
  j["output"] = {{"points", c.output.points}, {"half_width", c.output.half_width}};
  j["dictionary"] = {{"size", c.dictionary.size}, {"seed", c.dictionary.seed}, {"resolution", c.dictionary.resolution}};
  j["cone"] = {{"t_min_cells", c.cone.t_min_cells},
               {"t_max_sides", c.cone.t_max_sides},
               {"ratio", c.cone.ratio},
               {"y_cells_per_t", c.cone.y_cells_per_t},
               {"k_max", c.cone.k_max}};
  j["lambdas"] = c.lambdas;
  j["l2_ratio_lambdas"] = c.l2_ratio_lambdas;
  j["a1_threshold"] = c.a1_threshold;
  j["family_side"] = c.family_side;
  j["superposition_instances"] = c.superposition_instances;
  j["stability_atoms"] = c.stability_atoms;
  j["seed"] = c.seed;
  return j;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read config " + path);
  return config_from_json(nlohmann::json::parse(in));
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string config_hash(const ExperimentConfig& c) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(config_to_json(c).dump())));
  return buf;
}

}  // namespace wisq::harness
