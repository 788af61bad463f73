#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mmf::features {

struct PairRecord {
  std::string sample_id;
  std::string model_id;
  std::filesystem::path source;
  std::filesystem::path translated;
  std::optional<std::filesystem::path> ground_truth;

  bool operator==(const PairRecord&) const = default;
};

struct TripletManifest {
  std::vector<PairRecord> records;

  // True when records carry ground truth; throws when only some do.
  bool has_ground_truth() const;
  // Checks (sample_id, model_id) uniqueness and the ground-truth rule.
  void validate() const;
};

// JSON lines with keys sample_id, model_id, source, translated and optional
// ground_truth. Relative paths resolve against the manifest's directory.
TripletManifest read_manifest(const std::filesystem::path& path);
// Paths under the manifest's directory are written relative to it.
void write_manifest(const TripletManifest& manifest, const std::filesystem::path& path);

}  // namespace mmf::features
