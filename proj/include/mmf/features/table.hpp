#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mmf::features {

inline constexpr std::string_view kTargetColumn = "target_dists";

// Column-major table of named real features with row identifiers and an
// optional target. group_id is the source identity used for leakage-free
// splitting.
class FeatureTable {
 public:
  FeatureTable() = default;
  explicit FeatureTable(std::vector<std::string> columns);

  std::size_t rows() const { return sample_ids_.size(); }
  std::size_t cols() const { return names_.size(); }
  const std::vector<std::string>& columns() const { return names_; }

  // Index of a column, or nullopt.
  std::optional<std::size_t> find(std::string_view name) const;
  // Index of a column; throws InvalidArgument naming the missing column.
  std::size_t index(std::string_view name) const;

  std::span<const double> column(std::size_t c) const { return data_[c]; }
  std::span<const double> column(std::string_view name) const { return data_[index(name)]; }
  double value(std::size_t row, std::size_t col) const { return data_[col][row]; }

  const std::string& sample_id(std::size_t r) const { return sample_ids_[r]; }
  const std::string& model_id(std::size_t r) const { return model_ids_[r]; }
  const std::string& group_id(std::size_t r) const { return group_ids_[r]; }
  const std::vector<std::string>& group_ids() const { return group_ids_; }

  bool has_target() const { return target_.has_value(); }
  std::span<const double> target() const;

  // Appends a row; `values` follows column order. A target must be given for
  // every row or for none.
  void add_row(std::string sample_id, std::string model_id, std::string group_id,
               std::span<const double> values, std::optional<double> target = std::nullopt);

  void add_column(std::string name, std::vector<double> values);
  void set_column(std::size_t c, std::vector<double> values);
  void set_target(std::vector<double> values);
  void drop_target() { target_.reset(); }

  FeatureTable select_columns(const std::vector<std::string>& names) const;
  FeatureTable drop_columns(const std::vector<std::string>& names) const;
  FeatureTable subset_rows(std::span<const std::size_t> rows) const;

  // Throws InvalidArgument on non-finite values or duplicate column names.
  void validate() const;

  bool operator==(const FeatureTable&) const = default;

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<double>> data_;
  std::vector<std::string> sample_ids_, model_ids_, group_ids_;
  std::optional<std::vector<double>> target_;
};

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view s);

// CSV: header "sample_id,model_id,group_id,<features...>[,target_dists]",
// LF line endings.
void write_csv(const FeatureTable& table, std::ostream& out);
void write_csv(const FeatureTable& table, const std::filesystem::path& path);
FeatureTable read_csv(std::istream& in);
FeatureTable read_csv(const std::filesystem::path& path);

}  // namespace mmf::features
