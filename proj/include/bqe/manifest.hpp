// SPDX-License-Identifier: Apache-2.0

#ifndef BQE_MANIFEST_HPP
#define BQE_MANIFEST_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace bqe {

// Provenance record emitted next to every CLI command's outputs; replaying
// the recorded command reproduces the outputs bit-exactly.
struct RunManifest {
  std::string command;
  std::string config_path;
  uint64_t seed = 0;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::string version;
  double wall_seconds = 0.0;
};

void write_manifest(const RunManifest& manifest, const std::string& path);

}

#endif
