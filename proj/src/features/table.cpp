#include "mmf/features/table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "mmf/common/error.hpp"

namespace mmf::features {

FeatureTable::FeatureTable(std::vector<std::string> columns)
    : names_(std::move(columns)), data_(names_.size()) {}

std::optional<std::size_t> FeatureTable::find(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return i;
  return std::nullopt;
}

std::size_t FeatureTable::index(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw InvalidArgument("missing feature column '" + std::string(name) + "'");
}

std::span<const double> FeatureTable::target() const {
  if (!target_) throw InvalidArgument("feature table has no target column");
  return *target_;
}

void FeatureTable::add_row(std::string sample_id, std::string model_id, std::string group_id,
                           std::span<const double> values, std::optional<double> target) {
  if (values.size() != names_.size())
    throw InvalidArgument("row has " + std::to_string(values.size()) + " values, table has " +
                          std::to_string(names_.size()) + " columns");
  if (rows() == 0) {
    if (target) target_.emplace();
  } else if (target.has_value() != target_.has_value()) {
    throw InvalidArgument("target must be present on all rows or none");
  }
  for (std::size_t c = 0; c < values.size(); ++c) data_[c].push_back(values[c]);
  if (target) target_->push_back(*target);
  sample_ids_.push_back(std::move(sample_id));
  model_ids_.push_back(std::move(model_id));
  group_ids_.push_back(std::move(group_id));
}

void FeatureTable::add_column(std::string name, std::vector<double> values) {
  if (values.size() != rows())
    throw InvalidArgument("column '" + name + "' has wrong length");
  if (find(name)) throw InvalidArgument("duplicate column '" + name + "'");
  names_.push_back(std::move(name));
  data_.push_back(std::move(values));
}

void FeatureTable::set_column(std::size_t c, std::vector<double> values) {
  if (values.size() != rows()) throw InvalidArgument("column '" + names_.at(c) + "' has wrong length");
  data_.at(c) = std::move(values);
}

void FeatureTable::set_target(std::vector<double> values) {
  if (values.size() != rows()) throw InvalidArgument("target has wrong length");
  target_ = std::move(values);
}

FeatureTable FeatureTable::select_columns(const std::vector<std::string>& names) const {
  FeatureTable out;
  out.sample_ids_ = sample_ids_;
  out.model_ids_ = model_ids_;
  out.group_ids_ = group_ids_;
  out.target_ = target_;
  for (const auto& n : names) {
    out.names_.push_back(n);
    out.data_.push_back(data_[index(n)]);
  }
  return out;
}

FeatureTable FeatureTable::drop_columns(const std::vector<std::string>& names) const {
  std::set<std::string> drop(names.begin(), names.end());
  std::vector<std::string> keep;
  for (const auto& n : names_)
    if (!drop.count(n)) keep.push_back(n);
  return select_columns(keep);
}

FeatureTable FeatureTable::subset_rows(std::span<const std::size_t> rows) const {
  FeatureTable out(names_);
  if (target_) out.target_.emplace();
  for (std::size_t r : rows) {
    if (r >= this->rows()) throw InvalidArgument("row index out of range");
    for (std::size_t c = 0; c < names_.size(); ++c) out.data_[c].push_back(data_[c][r]);
    if (target_) out.target_->push_back((*target_)[r]);
    out.sample_ids_.push_back(sample_ids_[r]);
    out.model_ids_.push_back(model_ids_[r]);
    out.group_ids_.push_back(group_ids_[r]);
  }
  return out;
}

void FeatureTable::validate() const {
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (n == kTargetColumn || n == "sample_id" || n == "model_id" || n == "group_id")
      throw InvalidArgument("reserved column name '" + n + "'");
    if (!seen.insert(n).second) throw InvalidArgument("duplicate column '" + n + "'");
  }
  for (std::size_t c = 0; c < names_.size(); ++c)
    for (std::size_t r = 0; r < rows(); ++r)
      if (!std::isfinite(data_[c][r]))
        throw InvalidArgument("non-finite value in column '" + names_[c] + "' row " + std::to_string(r));
  if (target_)
    for (double v : *target_)
      if (!std::isfinite(v)) throw InvalidArgument("non-finite target value");
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw InvalidArgument("cannot parse number '" + std::string(s) + "'");
  return v;
}

namespace {

std::vector<std::string_view> split_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

void check_field(const std::string& s) {
  if (s.find_first_of(",\n\r\"") != std::string::npos)
    throw InvalidArgument("identifier '" + s + "' contains a CSV delimiter");
}

}  // namespace

void write_csv(const FeatureTable& table, std::ostream& out) {
  out << "sample_id,model_id,group_id";
  for (const auto& n : table.columns()) {
    check_field(n);
    out << ',' << n;
  }
  if (table.has_target()) out << ',' << kTargetColumn;
  out << '\n';
  for (std::size_t r = 0; r < table.rows(); ++r) {
    check_field(table.sample_id(r));
    check_field(table.model_id(r));
    out << table.sample_id(r) << ',' << table.model_id(r) << ',' << table.group_id(r);
    for (std::size_t c = 0; c < table.cols(); ++c) out << ',' << format_double(table.value(r, c));
    if (table.has_target()) out << ',' << format_double(table.target()[r]);
    out << '\n';
  }
}

void write_csv(const FeatureTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_csv(table, out);
  if (!out) throw IoError("write failed: " + path.string());
}

FeatureTable read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("empty feature CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split_line(line);
  if (header.size() < 3 || header[0] != "sample_id" || header[1] != "model_id" || header[2] != "group_id")
    throw InvalidArgument("feature CSV must start with sample_id,model_id,group_id");
  bool has_target = header.back() == kTargetColumn;
  std::vector<std::string> names(header.begin() + 3, header.end() - (has_target ? 1 : 0));
  FeatureTable table(names);
  std::vector<double> values(names.size());
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto f = split_line(line);
    if (f.size() != header.size())
      throw InvalidArgument("feature CSV line " + std::to_string(lineno) + " has " + std::to_string(f.size()) +
                            " fields, expected " + std::to_string(header.size()));
    for (std::size_t c = 0; c < names.size(); ++c) values[c] = parse_double(f[c + 3]);
    std::optional<double> t;
    if (has_target) t = parse_double(f.back());
    table.add_row(std::string(f[0]), std::string(f[1]), std::string(f[2]), values, t);
  }
  if (has_target && table.rows() == 0) table.set_target({});
  table.validate();
  return table;
}

FeatureTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  return read_csv(in);
}

}  // namespace mmf::features
