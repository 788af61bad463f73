#include "mmf/features/manifest.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "mmf/common/error.hpp"

namespace mmf::features {

namespace fs = std::filesystem;

bool TripletManifest::has_ground_truth() const {
  std::size_t with = 0;
  for (const auto& r : records) with += r.ground_truth.has_value();
  if (with != 0 && with != records.size())
    throw InvalidArgument("manifest mixes records with and without ground_truth");
  return with != 0;
}

void TripletManifest::validate() const {
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& r : records) {
    if (r.sample_id.empty() || r.model_id.empty()) throw InvalidArgument("manifest record with empty id");
    if (!seen.emplace(r.sample_id, r.model_id).second)
      throw InvalidArgument("duplicate manifest record " + r.sample_id + "/" + r.model_id);
  }
  has_ground_truth();
}

TripletManifest read_manifest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read manifest " + path.string());
  const fs::path base = path.parent_path();
  auto resolve = [&](const std::string& p) {
    fs::path q(p);
    return q.is_absolute() ? q : (base / q).lexically_normal();
  };
  TripletManifest m;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      PairRecord r;
      r.sample_id = j.at("sample_id").get<std::string>();
      r.model_id = j.at("model_id").get<std::string>();
      r.source = resolve(j.at("source").get<std::string>());
      r.translated = resolve(j.at("translated").get<std::string>());
      if (j.contains("ground_truth") && !j["ground_truth"].is_null())
        r.ground_truth = resolve(j["ground_truth"].get<std::string>());
      m.records.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw InvalidArgument(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  m.validate();
  return m;
}

void write_manifest(const TripletManifest& manifest, const fs::path& path) {
  const fs::path base = fs::absolute(path).parent_path();
  auto rel = [&](const fs::path& p) {
    fs::path a = fs::absolute(p).lexically_normal();
    fs::path r = a.lexically_relative(base);
    if (r.empty() || *r.begin() == "..") return a.generic_string();
    return r.generic_string();
  };
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write manifest " + path.string());
  for (const auto& r : manifest.records) {
    nlohmann::ordered_json j;
    j["sample_id"] = r.sample_id;
    j["model_id"] = r.model_id;
    j["source"] = rel(r.source);
    j["translated"] = rel(r.translated);
    if (r.ground_truth) j["ground_truth"] = rel(*r.ground_truth);
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace mmf::features
