#pragma once

// Dictionary export/import: a JSON manifest plus one CSV per member.
// Values are written with 17 significant digits, so a re-imported dictionary
// reproduces every operator value bit for bit.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "wisq/error.hpp"
#include "wisq/intrinsic.hpp"

namespace wisq {

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline void export_dictionary(const TestFunctionDictionary& dict, const std::filesystem::path& dir) {
  require(!dict.members.empty(), "cannot export an empty dictionary");
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json manifest;
  manifest["alpha"] = dict.alpha;
  manifest["dim"] = dict.dim;
  manifest["seed"] = dict.seed;
  manifest["resolution"] = dict.members.front().phi.grid.points_per_axis();
  manifest["members"] = nlohmann::ordered_json::array();
  for (std::size_t j = 0; j < dict.members.size(); ++j) {
    const DictionaryMember& m = dict.members[j];
    char name[32];
    std::snprintf(name, sizeof name, "member_%04zu.csv", j);
    std::ofstream out(dir / name);
    if (!out) throw Error("cannot write " + (dir / name).string());
    out << (dict.dim == 1 ? "u,value\n" : "u,v,value\n");
    const Grid& g = m.phi.grid;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Point p = g.point(i);
      out << detail::format_double(p[0]) << ',';
      if (dict.dim == 2) out << detail::format_double(p[1]) << ',';
      out << detail::format_double(m.phi.values[i]) << '\n';
    }
    manifest["members"].push_back({{"file", name},
                                   {"generator", to_string(m.generator)},
                                   {"seminorm", m.certificate.seminorm},
                                   {"mean", m.certificate.mean},
                                   {"support_radius", m.certificate.support_radius}});
  }
  std::ofstream mf(dir / "manifest.json");
  if (!mf) throw Error("cannot write " + (dir / "manifest.json").string());
  mf << manifest.dump(2) << '\n';
}

/// Reads a dictionary written by export_dictionary; every member is certified again on load.
inline TestFunctionDictionary import_dictionary(const std::filesystem::path& dir) {
  std::ifstream mf(dir / "manifest.json");
  if (!mf) throw Error("cannot read " + (dir / "manifest.json").string());
  const nlohmann::json manifest = nlohmann::json::parse(mf);
  TestFunctionDictionary dict;
  dict.alpha = manifest.at("alpha").get<double>();
  dict.dim = manifest.at("dim").get<int>();
  dict.seed = manifest.at("seed").get<std::uint64_t>();
  const Grid g = unit_kernel_grid(dict.dim, manifest.at("resolution").get<int>());
  for (const auto& entry : manifest.at("members")) {
    const auto path = dir / entry.at("file").get<std::string>();
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path.string());
    std::string line;
    std::getline(in, line);  // header
    std::vector<double> values;
    values.reserve(g.size());
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto comma = line.rfind(',');
      values.push_back(std::stod(line.substr(comma + 1)));
    }
    if (values.size() != g.size()) throw Error("member file " + path.string() + " does not match the manifest resolution");
    SampledFunction phi(g, std::move(values));
    dict.add(std::move(phi), generator_from_string(entry.at("generator").get<std::string>()));
    if (dict.members.back().certificate.seminorm != entry.at("seminorm").get<double>()) {
      throw Error("member " + path.string() + " seminorm differs from the manifest");
    }
  }
  if (dict.members.empty()) throw Error("manifest lists no members");
  return dict;
}

}  // namespace wisq
