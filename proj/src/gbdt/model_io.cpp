#include "mmf/gbdt/model_io.hpp"

#include <fstream>
#include <map>

#include "mmf/common/error.hpp"

namespace mmf::gbdt {

using nlohmann::json;

namespace {

json node_to_json(const Tree& tree, int i, const std::vector<std::string>& names) {
  const auto& n = tree.nodes.at(static_cast<std::size_t>(i));
  if (n.is_leaf()) return json{{"leaf", n.value}};
  return json{{"feature", names.at(static_cast<std::size_t>(n.feature))},
              {"threshold", n.threshold},
              {"left", node_to_json(tree, n.left, names)},
              {"right", node_to_json(tree, n.right, names)}};
}

int node_from_json(const json& j, const std::map<std::string, int>& index, Tree& tree) {
  const int id = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  if (j.contains("leaf")) {
    tree.nodes[id].value = j.at("leaf").get<double>();
    return id;
  }
  const auto name = j.at("feature").get<std::string>();
  auto it = index.find(name);
  if (it == index.end()) throw InvalidArgument("tree references unknown feature '" + name + "'");
  const double thr = j.at("threshold").get<double>();
  const int l = node_from_json(j.at("left"), index, tree);
  const int r = node_from_json(j.at("right"), index, tree);
  auto& n = tree.nodes[id];
  n.feature = it->second;
  n.threshold = thr;
  n.left = l;
  n.right = r;
  return id;
}

}  // namespace

json tree_to_json(const Tree& tree, const std::vector<std::string>& feature_names) {
  if (tree.nodes.empty()) throw InvalidArgument("empty tree");
  return node_to_json(tree, 0, feature_names);
}

Tree tree_from_json(const json& j, const std::vector<std::string>& feature_names) {
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < feature_names.size(); ++i) index[feature_names[i]] = static_cast<int>(i);
  Tree tree;
  node_from_json(j, index, tree);
  return tree;
}

json config_to_json(const GbdtConfig& c) {
  return json{{"strategy", std::string(to_string(c.strategy))},
              {"learning_rate", c.learning_rate},
              {"max_trees", c.max_trees},
              {"max_leaves", c.max_leaves},
              {"max_depth", c.max_depth},
              {"min_samples_leaf", c.min_samples_leaf},
              {"l2_reg", c.l2_reg},
              {"subsample_rows", c.subsample_rows},
              {"subsample_cols", c.subsample_cols},
              {"early_stopping_rounds", c.early_stopping_rounds},
              {"seed", c.seed}};
}

GbdtConfig config_from_json(const json& j) {
  GbdtConfig c;
  c.strategy = parse_strategy(j.at("strategy").get<std::string>());
  c.learning_rate = j.at("learning_rate").get<double>();
  c.max_trees = j.at("max_trees").get<int>();
  c.max_leaves = j.at("max_leaves").get<int>();
  c.max_depth = j.at("max_depth").get<int>();
  c.min_samples_leaf = j.at("min_samples_leaf").get<int>();
  c.l2_reg = j.at("l2_reg").get<double>();
  c.subsample_rows = j.at("subsample_rows").get<double>();
  c.subsample_cols = j.at("subsample_cols").get<double>();
  c.early_stopping_rounds = j.at("early_stopping_rounds").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.validate();
  return c;
}

json model_to_json(const GbdtModel& m) {
  json trees = json::array();
  for (const auto& t : m.trees) trees.push_back(tree_to_json(t, m.feature_names));
  json history = json::array();
  for (const auto& h : m.train_history) {
    json e{{"train_rmse", h.train_rmse}};
    if (h.valid_rmse) e["valid_rmse"] = *h.valid_rmse;
    history.push_back(e);
  }
  return json{{"base_prediction", m.base_prediction},
              {"config", config_to_json(m.config)},
              {"feature_names", m.feature_names},
              {"train_history", history},
              {"trees", trees}};
}

GbdtModel model_from_json(const json& j) {
  try {
    GbdtModel m;
    m.base_prediction = j.at("base_prediction").get<double>();
    m.config = config_from_json(j.at("config"));
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    for (const auto& t : j.at("trees")) m.trees.push_back(tree_from_json(t, m.feature_names));
    for (const auto& h : j.at("train_history")) {
      IterationRecord r;
      r.train_rmse = h.at("train_rmse").get<double>();
      if (h.contains("valid_rmse")) r.valid_rmse = h["valid_rmse"].get<double>();
      m.train_history.push_back(r);
    }
    return m;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed model json: ") + e.what());
  }
}

void save_model(const GbdtModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << model_to_json(model).dump(1) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

GbdtModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace mmf::gbdt
