#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cli/run_config.hpp"

namespace amf::cli {

std::string sha256_hex(std::string_view bytes);

/// Collects the files a subcommand writes so the manifest can hash them.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, std::string_view contents);
  const std::filesystem::path& dir() const { return dir_; }
  const std::vector<std::string>& files() const { return files_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

/// manifest_<label>.txt: the resolved config (usable again via --config),
/// the tool version, and SHA-256 digests of every input and output file.
/// The thread count is left out because it never changes the results.
/// `read_artifacts` lists earlier outputs consumed by this run.
void write_manifest(const RunConfig& config, std::string_view label, const ArtifactWriter& artifacts,
                    const std::vector<std::string>& read_artifacts = {});

}  // namespace amf::cli
