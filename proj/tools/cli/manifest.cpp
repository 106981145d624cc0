#include "cli/manifest.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cstdio>

#include "amf/error.hpp"
#include "amf/io.hpp"

#ifndef AMF_VERSION
#define AMF_VERSION "0.0.0"
#endif

namespace amf::cli {

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::kIo, "SHA-256 digest failed");
  }
  std::string hex;
  hex.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    char buf[3];
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

void ArtifactWriter::write(const std::string& name, std::string_view contents) {
  io::write_file(dir_ / name, contents);
  if (std::find(files_.begin(), files_.end(), name) == files_.end()) files_.push_back(name);
}

void write_manifest(const RunConfig& config, std::string_view label, const ArtifactWriter& artifacts,
                    const std::vector<std::string>& read_artifacts) {
  io::KeyValueFile manifest = config.to_config();
  manifest.set("amf_version", AMF_VERSION);
  manifest.set("subcommand", std::string(label));
  const std::pair<const char*, const std::optional<std::filesystem::path>*> inputs[] = {
      {"securities", &config.securities}, {"basis", &config.basis},     {"rf", &config.rf},
      {"categories", &config.categories}, {"classes", &config.classes}, {"eligibility", &config.eligibility}};
  for (const auto& [key, path] : inputs) {
    if (*path && std::filesystem::exists(**path)) {
      manifest.set(std::string("sha256.input.") + key, sha256_hex(io::read_file(**path)));
    }
  }
  for (const auto& name : read_artifacts) {
    manifest.set("sha256.artifact." + name, sha256_hex(io::read_file(artifacts.dir() / name)));
  }
  std::vector<std::string> files = artifacts.files();
  std::sort(files.begin(), files.end());
  for (const auto& name : files) {
    manifest.set("sha256.output." + name, sha256_hex(io::read_file(artifacts.dir() / name)));
  }
  std::string file = "manifest_" + std::string(label) + ".txt";
  std::replace(file.begin(), file.end(), ' ', '_');
  io::write_file(artifacts.dir() / file, "# amf run manifest\n" + manifest.to_string());
}

}  // namespace amf::cli
