#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmf/gbdt/gbdt.hpp"

namespace mmf::gbdt {

// Nested {feature, threshold, left, right} | {leaf} objects; features by name.
nlohmann::json tree_to_json(const Tree& tree, const std::vector<std::string>& feature_names);
Tree tree_from_json(const nlohmann::json& j, const std::vector<std::string>& feature_names);

nlohmann::json config_to_json(const GbdtConfig& cfg);
GbdtConfig config_from_json(const nlohmann::json& j);

nlohmann::json model_to_json(const GbdtModel& model);
GbdtModel model_from_json(const nlohmann::json& j);

void save_model(const GbdtModel& model, const std::filesystem::path& path);
GbdtModel load_model(const std::filesystem::path& path);

}  // namespace mmf::gbdt
