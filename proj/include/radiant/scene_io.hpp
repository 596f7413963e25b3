#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "radiant/errors.hpp"
#include "radiant/scene.hpp"

namespace radiant {

using Json = nlohmann::json;

namespace detail {

inline Polygon3 corners_from_json(const Json& arr, const std::string& owner) {
  if (!arr.is_array()) throw Error(ErrorKind::InvalidArgument, owner + ": corners must be an array");
  Polygon3 out;
  for (const auto& c : arr) {
    if (!c.is_array() || c.size() != 3) {
      throw Error(ErrorKind::InvalidArgument, owner + ": each corner must be [x, y, z]");
    }
    out.emplace_back(c[0].get<double>(), c[1].get<double>(), c[2].get<double>());
  }
  return out;
}

inline Json corners_to_json(const Polygon3& corners) {
  Json arr = Json::array();
  for (const auto& c : corners) arr.push_back({c.x(), c.y(), c.z()});
  return arr;
}

}  // namespace detail

inline Scene scene_from_json(const Json& doc) {
  try {
    std::vector<Surface> surfaces;
    for (const auto& js : doc.at("surfaces")) {
      Surface s;
      s.id = js.at("id").get<std::string>();
      s.corners = detail::corners_from_json(js.at("corners"), "surface '" + s.id + "'");
      s.temperature_k = js.at("temperature_k").get<double>();
      if (js.contains("features")) {
        for (const auto& jf : js.at("features")) {
          ThermalFeature f;
          f.id = jf.at("id").get<std::string>();
          f.label = jf.value("label", std::string{});
          f.corners = detail::corners_from_json(jf.at("corners"), "feature '" + f.id + "'");
          f.temperature_k = jf.at("temperature_k").get<double>();
          s.features.push_back(std::move(f));
        }
      }
      surfaces.push_back(std::move(s));
    }
    return Scene(std::move(surfaces), doc.value("closed_enclosure", false));
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("malformed scene document: ") + e.what());
  }
}

inline Json scene_to_json(const Scene& scene, const Json& metadata = Json::object()) {
  Json doc;
  doc["closed_enclosure"] = scene.closed_enclosure();
  Json surfaces = Json::array();
  for (const auto& s : scene.surfaces()) {
    Json js;
    js["id"] = s.id;
    js["corners"] = detail::corners_to_json(s.corners);
    js["temperature_k"] = s.temperature_k;
    Json features = Json::array();
    for (const auto& f : s.features) {
      features.push_back({{"id", f.id},
                          {"label", f.label},
                          {"corners", detail::corners_to_json(f.corners)},
                          {"temperature_k", f.temperature_k}});
    }
    js["features"] = std::move(features);
    surfaces.push_back(std::move(js));
  }
  doc["surfaces"] = std::move(surfaces);
  if (!metadata.empty()) doc["metadata"] = metadata;
  return doc;
}

inline Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, "'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(ErrorKind::Io, "failed writing '" + path.string() + "'");
}

inline Scene read_scene(const std::filesystem::path& path) { return scene_from_json(read_json_file(path)); }

inline void write_scene(const std::filesystem::path& path, const Scene& scene, const Json& metadata = Json::object()) {
  write_text_file(path, scene_to_json(scene, metadata).dump(2) + "\n");
}

}  // namespace radiant
