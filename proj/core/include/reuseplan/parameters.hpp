#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace reuseplan {

/// Shortest decimal string that round-trips to `value` ("-0" prints as "0").
std::string canonical_decimal(double value);

/// Backslash-escapes the separator characters used by signature encodings so
/// that concatenated encodings cannot collide.
std::string escape_token(std::string_view raw);

struct GridRange {
  double min = 0.0;
  double max = 0.0;
  double step = 1.0;
};

struct CategoricalValues {
  std::vector<std::string> values;
};

/// One axis of the search grid: an evenly stepped numeric range or a list of
/// labels. Grid points are enumerated from `min`; values print canonically.
class ParameterSpec {
 public:
  ParameterSpec(std::string name, GridRange grid);
  ParameterSpec(std::string name, CategoricalValues values);

  const std::string& name() const { return name_; }
  bool is_grid() const { return std::holds_alternative<GridRange>(kind_); }
  const GridRange& grid() const { return std::get<GridRange>(kind_); }
  const CategoricalValues& categorical() const {
    return std::get<CategoricalValues>(kind_);
  }

  std::size_t level_count() const { return levels_.size(); }
  bool varied() const { return levels_.size() > 1; }
  const std::string& value_at(std::size_t index) const { return levels_.at(index); }
  std::optional<std::size_t> index_of(std::string_view canonical) const;

  /// Maps a unit-interval coordinate onto a level index. Grid parameters snap
  /// to the nearest grid point (ties toward min); categorical parameters take
  /// floor(u * |values|).
  std::size_t snap_unit(double u) const;

  /// Numeric value of a level (grid only).
  double numeric_at(std::size_t index) const;

 private:
  std::string name_;
  std::variant<GridRange, CategoricalValues> kind_;
  std::vector<std::string> levels_;
};

/// Ordered map parameter name -> canonical value string.
class ParameterSet {
 public:
  ParameterSet() = default;
  explicit ParameterSet(std::map<std::string, std::string> values)
      : values_(std::move(values)) {}

  void set(const std::string& name, std::string canonical) {
    values_[name] = std::move(canonical);
  }
  const std::string* find(const std::string& name) const;
  const std::map<std::string, std::string>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }

  /// Restriction to the given names (missing names are skipped).
  ParameterSet restrict_to(const std::vector<std::string>& names) const;

  /// `name=value;name=value` with escaped tokens; equal encodings iff equal sets.
  std::string encode() const;

  friend bool operator==(const ParameterSet&, const ParameterSet&) = default;

 private:
  std::map<std::string, std::string> values_;
};

class ParameterSpace {
 public:
  ParameterSpace() = default;
  explicit ParameterSpace(std::vector<ParameterSpec> params);

  const std::vector<ParameterSpec>& params() const { return params_; }
  std::size_t size() const { return params_.size(); }
  const ParameterSpec* find(std::string_view name) const;

  /// Parameters with more than one admissible value; these are the sampled
  /// dimensions. Single-valued parameters are emitted as constants.
  std::vector<std::size_t> varied_indices() const;

  /// Throws Error(validation) when a name is unknown or a value is off-grid.
  void validate(const ParameterSet& set) const;

  /// Number of grid points (as a double; the reference space is ~2.1e13).
  double cardinality() const;

 private:
  std::vector<ParameterSpec> params_;
};

/// `{"params":[{"name","kind":"grid","min","max","step"} |
///             {"name","kind":"categorical","values":[...]}]}`
ParameterSpace parse_parameter_space(std::string_view json_text);
std::string parameter_space_to_json(const ParameterSpace& space);

}  // namespace reuseplan
