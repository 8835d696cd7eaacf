// SPDX-License-Identifier: Apache-2.0

#include "bqe/manifest.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace bqe {

void write_manifest(const RunManifest& manifest, const std::string& path) {
  nlohmann::json j;
  j["command"] = manifest.command;
  j["config"] = manifest.config_path;
  j["seed"] = manifest.seed;
  j["inputs"] = manifest.inputs;
  j["outputs"] = manifest.outputs;
  j["version"] = manifest.version;
  j["wall_seconds"] = manifest.wall_seconds;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("unwritable-path: '" + path + "'");
  out << j.dump(2) << '\n';
}

}
