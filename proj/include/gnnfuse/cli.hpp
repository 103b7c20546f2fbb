#pragma once

#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "gnnfuse/gradcheck.hpp"
#include "json.hpp"

namespace gnnfuse::cli {

inline constexpr std::string_view kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kValidation = 1, kNumerical = 2, kIo = 3 };

// Provenance record written next to every artifact.
struct RunManifest {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::map<std::string, std::string> inputs;   // role -> content hash
  std::map<std::string, std::string> outputs;  // role -> path
  std::uint64_t seed = 0;
  std::map<std::string, double> timings;       // phase -> seconds
};

nlohmann::json manifest_to_json(const RunManifest& m);

// foo/model.json -> foo/model.json.manifest.json
std::filesystem::path manifest_path(const std::filesystem::path& artifact);

void write_manifest(const RunManifest& m, const std::filesystem::path& path);

// Random C-class instance with a kappa graph built from correlated labels;
// every parameter of every layer is probed.
struct GradCheckInstance {
  std::size_t classes = 5;
  std::size_t layers = 3;
  std::size_t inputs = 6;
  std::size_t k = 2;
  std::size_t first_width = 8;
  std::size_t batch = 4;
  std::uint64_t seed = 0;
  double step = 1e-5;
  bool fault_injection = false;
};

GradCheckResult gradient_check_instance(const GradCheckInstance& instance);

// args excludes the program name. Returns a process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gnnfuse::cli
