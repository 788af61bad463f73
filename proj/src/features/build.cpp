#include <exception>
#include <filesystem>

#include "mmf/common/error.hpp"
#include "mmf/deepsim/deepsim.hpp"
#include "mmf/features/features.hpp"
#include "mmf/imgio/codec.hpp"
#include "mmf/metrics/battery.hpp"

namespace mmf::features {

namespace {

bool same_file(const std::filesystem::path& a, const std::filesystem::path& b) {
  std::error_code ea, eb;
  auto ca = std::filesystem::weakly_canonical(a, ea);
  auto cb = std::filesystem::weakly_canonical(b, eb);
  if (ea || eb) return a.lexically_normal() == b.lexically_normal();
  return ca == cb;
}

}  // namespace

FeatureTable build_feature_table(const TripletManifest& manifest, metrics::BatteryTier tier,
                                 const deepsim::FeatureExtractor& fx) {
  manifest.validate();
  const bool with_target = manifest.has_ground_truth();
  const auto names = metrics::battery_metrics(tier);
  const auto n = static_cast<std::ptrdiff_t>(manifest.records.size());

  std::vector<std::vector<double>> values(manifest.records.size());
  std::vector<double> targets(manifest.records.size(), 0.0);
  std::vector<std::exception_ptr> errors(manifest.records.size());

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& rec = manifest.records[i];
    try {
      const std::string pair_id = rec.sample_id + "/" + rec.model_id;
      const auto src = imgio::decode(rec.source);
      const auto out = imgio::decode(rec.translated);
      if (!src.same_shape(out))
        throw InvalidArgument(pair_id + ": source and translated images differ in shape");
      auto scores = metrics::compute_battery(src, out, tier, fx, pair_id);
      values[i].reserve(scores.size());
      for (const auto& s : scores) values[i].push_back(s.value);
      if (with_target && !same_file(rec.translated, *rec.ground_truth)) {
        const auto gt = imgio::decode(*rec.ground_truth);
        if (!gt.same_shape(out))
          throw InvalidArgument(pair_id + ": translated and ground-truth images differ in shape");
        targets[i] = metrics::compute_metric("dists", out, gt, fx);
      }
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  FeatureTable table(names);
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    const auto& rec = manifest.records[i];
    table.add_row(rec.sample_id, rec.model_id, rec.sample_id, values[i],
                  with_target ? std::optional<double>(targets[i]) : std::nullopt);
  }
  table.validate();
  return table;
}

}  // namespace mmf::features
