#include "reuseplan/parameters.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include "json_util.hpp"
#include "reuseplan/error.hpp"

namespace reuseplan {
namespace {

constexpr std::size_t kMaxGridPoints = 10'000'000;

std::size_t fixed_decimals(double value) {
  const std::string text = canonical_decimal(value);
  const auto dot = text.find('.');
  return dot == std::string::npos ? 0 : text.size() - dot - 1;
}

std::vector<std::string> enumerate_grid(const std::string& name, const GridRange& g) {
  if (!std::isfinite(g.min) || !std::isfinite(g.max) || !std::isfinite(g.step)) {
    fail(ErrorKind::validation, "parameter '" + name + "': grid bounds must be finite");
  }
  if (g.step <= 0.0) fail(ErrorKind::validation, "parameter '" + name + "': step must be > 0");
  if (g.min > g.max) fail(ErrorKind::validation, "parameter '" + name + "': min > max");
  const double span = (g.max - g.min) / g.step;
  if (span + 1.0 > static_cast<double>(kMaxGridPoints)) {
    fail(ErrorKind::limit, "parameter '" + name + "': too many grid points");
  }
  const auto count = static_cast<std::size_t>(std::floor(span + 1e-9)) + 1;
  const auto decimals = static_cast<int>(std::max(fixed_decimals(g.min), fixed_decimals(g.step)));
  const double scale = std::pow(10.0, decimals);
  std::vector<std::string> levels;
  levels.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double raw = g.min + static_cast<double>(i) * g.step;
    levels.push_back(canonical_decimal(std::round(raw * scale) / scale));
  }
  return levels;
}

}  // namespace

std::string canonical_decimal(double value) {
  if (!std::isfinite(value)) fail(ErrorKind::validation, "non-finite parameter value");
  if (value == 0.0) return "0";
  char buffer[400];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value, std::chars_format::fixed);
  if (ec != std::errc{}) fail(ErrorKind::validation, "cannot format parameter value");
  return std::string(buffer, end);
}

std::string escape_token(std::string_view raw) {
  static constexpr std::string_view kSpecial = "\\=;,{}[]()|<>:#";
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    if (kSpecial.find(c) != std::string_view::npos) out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

ParameterSpec::ParameterSpec(std::string name, GridRange grid)
    : name_(std::move(name)), kind_(grid), levels_(enumerate_grid(name_, grid)) {}

ParameterSpec::ParameterSpec(std::string name, CategoricalValues values)
    : name_(std::move(name)), kind_(std::move(values)) {
  const auto& v = categorical().values;
  if (v.empty()) fail(ErrorKind::validation, "parameter '" + name_ + "': no categorical values");
  std::set<std::string> seen;
  for (const auto& label : v) {
    if (!seen.insert(label).second) {
      fail(ErrorKind::validation, "parameter '" + name_ + "': duplicate value '" + label + "'");
    }
  }
  levels_ = v;
}

std::optional<std::size_t> ParameterSpec::index_of(std::string_view canonical) const {
  const auto it = std::find(levels_.begin(), levels_.end(), canonical);
  if (it == levels_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - levels_.begin());
}

std::size_t ParameterSpec::snap_unit(double u) const {
  u = std::clamp(u, 0.0, 1.0);
  const auto m = levels_.size();
  if (is_grid()) {
    const double t = u * static_cast<double>(m - 1);
    const double idx = std::ceil(t - 0.5 - 1e-9);
    return static_cast<std::size_t>(std::clamp(idx, 0.0, static_cast<double>(m - 1)));
  }
  return std::min(static_cast<std::size_t>(u * static_cast<double>(m)), m - 1);
}

double ParameterSpec::numeric_at(std::size_t index) const {
  if (!is_grid()) fail(ErrorKind::validation, "parameter '" + name_ + "' is categorical");
  return std::stod(levels_.at(index));
}

const std::string* ParameterSet::find(const std::string& name) const {
  const auto it = values_.find(name);
  return it == values_.end() ? nullptr : &it->second;
}

ParameterSet ParameterSet::restrict_to(const std::vector<std::string>& names) const {
  ParameterSet out;
  for (const auto& name : names) {
    if (const auto* v = find(name)) out.set(name, *v);
  }
  return out;
}

std::string ParameterSet::encode() const {
  std::string out;
  bool first = true;
  for (const auto& [name, value] : values_) {
    if (!first) out.push_back(';');
    first = false;
    out += escape_token(name);
    out.push_back('=');
    out += escape_token(value);
  }
  return out;
}

ParameterSpace::ParameterSpace(std::vector<ParameterSpec> params) : params_(std::move(params)) {
  std::set<std::string> names;
  for (const auto& p : params_) {
    if (p.name().empty()) fail(ErrorKind::validation, "parameter with empty name");
    if (!names.insert(p.name()).second) {
      fail(ErrorKind::validation, "duplicate parameter name '" + p.name() + "'");
    }
  }
}

const ParameterSpec* ParameterSpace::find(std::string_view name) const {
  for (const auto& p : params_) {
    if (p.name() == name) return &p;
  }
  return nullptr;
}

std::vector<std::size_t> ParameterSpace::varied_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].varied()) out.push_back(i);
  }
  return out;
}

void ParameterSpace::validate(const ParameterSet& set) const {
  for (const auto& [name, value] : set.values()) {
    const auto* spec = find(name);
    if (spec == nullptr) fail(ErrorKind::validation, "unknown parameter '" + name + "'");
    if (!spec->index_of(value)) {
      fail(ErrorKind::validation, "parameter '" + name + "': value '" + value + "' is not admissible");
    }
  }
}

double ParameterSpace::cardinality() const {
  double total = 1.0;
  for (const auto& p : params_) total *= static_cast<double>(p.level_count());
  return total;
}

ParameterSpace parse_parameter_space(std::string_view json_text) {
  constexpr std::string_view what = "parameter space";
  const auto doc = detail::parse_json(json_text, what);
  detail::reject_unknown_fields(doc, {"params"}, what);
  const auto& params = doc.at("params");
  if (!params.is_array()) fail(ErrorKind::parse, "parameter space: 'params' must be an array");
  std::vector<ParameterSpec> specs;
  for (const auto& p : params) {
    const auto kind = detail::required<std::string>(p, "kind", what);
    const auto name = detail::required<std::string>(p, "name", what);
    if (kind == "grid") {
      detail::reject_unknown_fields(p, {"name", "kind", "min", "max", "step"}, what);
      specs.emplace_back(name, GridRange{detail::required<double>(p, "min", what),
                                         detail::required<double>(p, "max", what),
                                         detail::required<double>(p, "step", what)});
    } else if (kind == "categorical") {
      detail::reject_unknown_fields(p, {"name", "kind", "values"}, what);
      specs.emplace_back(name, CategoricalValues{
                                   detail::required<std::vector<std::string>>(p, "values", what)});
    } else {
      fail(ErrorKind::parse, "parameter '" + name + "': unknown kind '" + kind + "'");
    }
  }
  return ParameterSpace(std::move(specs));
}

std::string parameter_space_to_json(const ParameterSpace& space) {
  detail::json params = detail::json::array();
  for (const auto& p : space.params()) {
    if (p.is_grid()) {
      params.push_back({{"name", p.name()},
                        {"kind", "grid"},
                        {"min", p.grid().min},
                        {"max", p.grid().max},
                        {"step", p.grid().step}});
    } else {
      params.push_back({{"name", p.name()}, {"kind", "categorical"}, {"values", p.categorical().values}});
    }
  }
  return detail::dump(detail::json{{"params", params}});
}

}  // namespace reuseplan
