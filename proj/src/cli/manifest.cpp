#include "gnnfuse/cli.hpp"
#include "gnnfuse/io.hpp"

namespace gnnfuse::cli {

nlohmann::json manifest_to_json(const RunManifest& m) {
  return {{"command", m.command}, {"config", m.config},   {"inputs", m.inputs},
          {"outputs", m.outputs}, {"seed", m.seed},       {"timings", m.timings},
          {"version", std::string(kVersion)}};
}

std::filesystem::path manifest_path(const std::filesystem::path& artifact) {
  std::filesystem::path p = artifact;
  p += ".manifest.json";
  return p;
}

void write_manifest(const RunManifest& m, const std::filesystem::path& path) {
  io::write_text(path, manifest_to_json(m).dump(2) + "\n");
}

}  // namespace gnnfuse::cli
