#include "reuseplan/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json_util.hpp"
#include "reuseplan/error.hpp"
#include "reuseplan/rng.hpp"

namespace reuseplan {
namespace {

void check_shape(std::size_t n, std::size_t k) {
  if (n < 1 || k < 1) fail(ErrorKind::config, "point generators need n >= 1 and k >= 1");
}

/// Full parameter set for one row of unit coordinates over `factors`.
ParameterSet to_set(const ParameterSpace& space, const std::vector<std::size_t>& factors,
                    const std::vector<double>& row) {
  ParameterSet set;
  for (const auto& p : space.params()) {
    if (!p.varied()) set.set(p.name(), p.value_at(0));
  }
  for (std::size_t j = 0; j < factors.size(); ++j) {
    const auto& p = space.params()[factors[j]];
    set.set(p.name(), p.value_at(p.snap_unit(row[j])));
  }
  return set;
}

detail::json sets_json(const std::vector<ParameterSet>& sets) {
  auto out = detail::json::array();
  for (const auto& s : sets) {
    detail::json row = detail::json::object();
    for (const auto& [name, value] : s.values()) row[name] = value;
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace

std::string_view to_string(Generator generator) {
  switch (generator) {
    case Generator::mc: return "mc";
    case Generator::lhs: return "lhs";
    case Generator::qmc: return "qmc";
  }
  return "?";
}

Generator parse_generator(std::string_view text) {
  if (text == "mc") return Generator::mc;
  if (text == "lhs") return Generator::lhs;
  if (text == "qmc") return Generator::qmc;
  fail(ErrorKind::config, "unknown generator '" + std::string(text) + "' (expected mc, lhs or qmc)");
}

double halton(std::uint64_t index, std::uint32_t base) {
  if (index < 1 || base < 2) fail(ErrorKind::config, "halton needs index >= 1 and base >= 2");
  double result = 0.0;
  double f = 1.0 / base;
  while (index > 0) {
    result += f * static_cast<double>(index % base);
    index /= base;
    f /= base;
  }
  return result;
}

std::vector<std::uint32_t> first_primes(std::size_t count) {
  std::vector<std::uint32_t> primes;
  for (std::uint32_t c = 2; primes.size() < count; ++c) {
    bool prime = true;
    for (auto p : primes) {
      if (p * p > c) break;
      if (c % p == 0) {
        prime = false;
        break;
      }
    }
    if (prime) primes.push_back(c);
  }
  return primes;
}

UnitPoints mc(std::size_t n, std::size_t k, std::uint64_t seed) {
  check_shape(n, k);
  Rng rng(seed);
  UnitPoints out(n, std::vector<double>(k));
  for (auto& row : out) {
    for (auto& x : row) x = rng.uniform();
  }
  return out;
}

UnitPoints lhs(std::size_t n, std::size_t k, std::uint64_t seed) {
  check_shape(n, k);
  Rng rng(seed);
  UnitPoints out(n, std::vector<double>(k));
  std::vector<std::size_t> strata(n);
  for (std::size_t j = 0; j < k; ++j) {
    std::iota(strata.begin(), strata.end(), std::size_t{0});
    rng.shuffle(strata.begin(), strata.end());
    for (std::size_t i = 0; i < n; ++i) {
      const double x = (static_cast<double>(strata[i]) + rng.uniform()) / static_cast<double>(n);
      // Keep the point inside its stratum despite rounding at the upper edge.
      out[i][j] = std::min(x, std::nextafter(static_cast<double>(strata[i] + 1) / n, 0.0));
    }
  }
  return out;
}

UnitPoints qmc(std::size_t n, std::size_t k) {
  check_shape(n, k);
  const auto primes = first_primes(k);
  UnitPoints out(n, std::vector<double>(k));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) out[i][j] = halton(i + 1, primes[j]);
  }
  return out;
}

UnitPoints scrambled_qmc(std::size_t n, std::size_t k, std::uint64_t seed) {
  check_shape(n, k);
  const auto primes = first_primes(k);
  Rng rng(seed);
  UnitPoints out(n, std::vector<double>(k));
  for (std::size_t j = 0; j < k; ++j) {
    const std::uint32_t b = primes[j];
    // Enough digits to exhaust double precision in this base.
    const auto digits = static_cast<std::size_t>(std::ceil(53.0 / std::log2(static_cast<double>(b))));
    std::vector<std::vector<std::uint32_t>> perms(digits, std::vector<std::uint32_t>(b));
    for (auto& perm : perms) {
      std::iota(perm.begin(), perm.end(), 0U);
      rng.shuffle(perm.begin(), perm.end());
    }
    for (std::size_t i = 0; i < n; ++i) {
      std::uint64_t index = i + 1;
      double f = 1.0 / b;
      double x = 0.0;
      for (std::size_t d = 0; d < digits; ++d) {
        x += f * perms[d][index % b];
        index /= b;
        f /= b;
      }
      out[i][j] = std::min(x, std::nextafter(1.0, 0.0));
    }
  }
  return out;
}

UnitPoints generate_points(Generator generator, std::size_t n, std::size_t k, std::uint64_t seed) {
  switch (generator) {
    case Generator::mc: return mc(n, k, seed);
    case Generator::lhs: return lhs(n, k, seed);
    case Generator::qmc: return scrambled_qmc(n, k, seed);
  }
  fail(ErrorKind::config, "unknown generator");
}

double MoatConfig::delta() const {
  return static_cast<double>(levels) / (2.0 * static_cast<double>(levels - 1));
}

MoatDesign moat_design(const ParameterSpace& space, const MoatConfig& config) {
  const auto p = config.levels;
  if (p < 2 || p % 2 != 0) fail(ErrorKind::config, "MOAT levels p must be even and >= 2");
  if (config.trajectories < 1) fail(ErrorKind::config, "MOAT needs at least one trajectory");
  MoatDesign design;
  design.factors = space.varied_indices();
  const auto k = design.factors.size();
  if (k == 0) fail(ErrorKind::config, "parameter space has no varied parameter");
  for (auto f : design.factors) {
    const auto& spec = space.params()[f];
    if (spec.is_grid() && spec.level_count() < p) {
      fail(ErrorKind::config, "parameter '" + spec.name() + "' has fewer than " + std::to_string(p) +
                                  " grid points");
    }
  }
  design.trajectories = config.trajectories;
  design.delta = config.delta();

  const auto unit = [&](std::size_t level) { return static_cast<double>(level) / (p - 1); };
  const auto half = p / 2;
  const auto base = generate_points(config.generator, config.trajectories, k, config.seed);
  Rng order_rng(mix64(config.seed));
  std::vector<std::size_t> order(k);
  for (std::size_t t = 0; t < config.trajectories; ++t) {
    std::vector<std::size_t> level(k);
    for (std::size_t j = 0; j < k; ++j) {
      level[j] = std::min(static_cast<std::size_t>(base[t][j] * p), p - 1);
    }
    std::vector<double> point(k);
    for (std::size_t j = 0; j < k; ++j) point[j] = unit(level[j]);
    design.unit_points.push_back(point);
    design.steps.push_back(std::nullopt);

    std::iota(order.begin(), order.end(), std::size_t{0});
    order_rng.shuffle(order.begin(), order.end());
    for (auto j : order) {
      const bool up = level[j] < half;
      level[j] = up ? level[j] + half : level[j] - half;
      point[j] = unit(level[j]);
      design.unit_points.push_back(point);
      design.steps.push_back(MoatStep{j, up ? design.delta : -design.delta});
    }
  }
  design.sets.reserve(design.unit_points.size());
  for (const auto& row : design.unit_points) design.sets.push_back(to_set(space, design.factors, row));
  return design;
}

std::vector<ParameterSet> moat_sample(const ParameterSpace& space, const MoatConfig& config) {
  return moat_design(space, config).sets;
}

double elementary_effect(double y_before, double y_after, double delta) {
  if (delta == 0.0) fail(ErrorKind::config, "elementary effect with zero delta");
  return (y_after - y_before) / delta;
}

std::vector<ElementaryEffect> elementary_effects(const ParameterSpace& space,
                                                 const MoatDesign& design,
                                                 std::span<const double> outputs) {
  if (outputs.size() != design.unit_points.size()) {
    fail(ErrorKind::config, "expected one output per design row");
  }
  const auto per_trajectory = design.factors.size() + 1;
  std::vector<ElementaryEffect> out;
  for (std::size_t i = 0; i < design.steps.size(); ++i) {
    if (!design.steps[i]) continue;
    const auto& step = *design.steps[i];
    out.push_back({space.params()[design.factors[step.factor]].name(),
                   elementary_effect(outputs[i - 1], outputs[i], step.delta), i / per_trajectory});
  }
  return out;
}

VbdDesign vbd_design(const ParameterSpace& space, const VbdConfig& config) {
  VbdDesign design;
  design.factors = space.varied_indices();
  const auto k = design.factors.size();
  const auto n = config.sample_size;
  if (k == 0) fail(ErrorKind::config, "parameter space has no varied parameter");
  if (n < 1) fail(ErrorKind::config, "VBD sample size must be >= 1");
  const auto base = generate_points(config.generator, n, 2 * k, config.seed);
  for (const auto& row : base) {
    design.a.emplace_back(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k));
    design.b.emplace_back(row.begin() + static_cast<std::ptrdiff_t>(k), row.end());
  }
  design.unit_points = design.a;
  design.unit_points.insert(design.unit_points.end(), design.b.begin(), design.b.end());
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      auto row = design.b[i];
      row[j] = design.a[i][j];
      design.unit_points.push_back(std::move(row));
    }
  }
  design.sets.reserve(design.unit_points.size());
  for (const auto& row : design.unit_points) design.sets.push_back(to_set(space, design.factors, row));
  return design;
}

std::vector<ParameterSet> vbd_sample(const ParameterSpace& space, const VbdConfig& config) {
  return vbd_design(space, config).sets;
}

std::string moat_batch_json(const ParameterSpace& space, const MoatConfig& config,
                            const MoatDesign& design) {
  detail::json doc;
  doc["method"] = "moat";
  doc["config"] = {{"k", design.factors.size()},
                   {"levels", config.levels},
                   {"trajectories", config.trajectories},
                   {"delta", design.delta},
                   {"generator", to_string(config.generator)},
                   {"seed", config.seed},
                   {"rng", Rng::kAlgorithm}};
  doc["space_size"] = space.size();
  doc["sets"] = sets_json(design.sets);
  return detail::dump(doc);
}

std::string vbd_batch_json(const ParameterSpace& space, const VbdConfig& config,
                           const VbdDesign& design) {
  detail::json doc;
  doc["method"] = "vbd";
  doc["config"] = {{"k", design.factors.size()},
                   {"sample_size", config.sample_size},
                   {"generator", to_string(config.generator)},
                   {"seed", config.seed},
                   {"rng", Rng::kAlgorithm}};
  doc["space_size"] = space.size();
  doc["sets"] = sets_json(design.sets);
  return detail::dump(doc);
}

Batch parse_batch(std::string_view json_text) {
  constexpr std::string_view what = "batch";
  const auto doc = detail::parse_json(json_text, what);
  detail::reject_unknown_fields(doc, {"method", "config", "space_size", "sets"}, what);
  Batch batch;
  batch.method = detail::optional_field<std::string>(doc, "method", "custom", what);
  if (!doc.contains("sets") || !doc.at("sets").is_array()) {
    fail(ErrorKind::parse, "batch: 'sets' must be an array");
  }
  for (const auto& row : doc.at("sets")) {
    if (!row.is_object()) fail(ErrorKind::parse, "batch: each set must be an object");
    ParameterSet set;
    for (const auto& [name, value] : row.items()) {
      if (!value.is_string()) {
        fail(ErrorKind::parse, "batch: value of '" + name + "' must be a canonical string");
      }
      set.set(name, value.get<std::string>());
    }
    batch.sets.push_back(std::move(set));
  }
  return batch;
}

}  // namespace reuseplan
