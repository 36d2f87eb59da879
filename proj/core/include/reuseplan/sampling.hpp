#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reuseplan/parameters.hpp"

namespace reuseplan {

enum class Generator { mc, lhs, qmc };

std::string_view to_string(Generator generator);
Generator parse_generator(std::string_view text);

/// Row-major n x k matrix of unit-hypercube points.
using UnitPoints = std::vector<std::vector<double>>;

/// Radical inverse of `index` in `base` (index >= 1, base prime).
double halton(std::uint64_t index, std::uint32_t base);

/// First `count` primes (2, 3, 5, ...).
std::vector<std::uint32_t> first_primes(std::size_t count);

/// i.i.d. uniform points.
UnitPoints mc(std::size_t n, std::size_t k, std::uint64_t seed);
/// Latin hypercube: every column has exactly one point per stratum [j/n, (j+1)/n).
UnitPoints lhs(std::size_t n, std::size_t k, std::uint64_t seed);
/// Halton points with indices 1..n over the first k primes.
UnitPoints qmc(std::size_t n, std::size_t k);
/// Halton points with every digit position of every base passed through a
/// seeded random permutation (the generator behind Generator::qmc).
UnitPoints scrambled_qmc(std::size_t n, std::size_t k, std::uint64_t seed);

UnitPoints generate_points(Generator generator, std::size_t n, std::size_t k, std::uint64_t seed);

// ---------------------------------------------------------------- MOAT

struct MoatConfig {
  std::size_t levels = 4;        // p, even and >= 2
  std::size_t trajectories = 10; // r
  std::uint64_t seed = 0;
  Generator generator = Generator::mc;  // draws the trajectory base points

  /// p / (2(p-1)), in unit-hypercube coordinates.
  double delta() const;
};

/// One-at-a-time move that produced a point from its predecessor.
struct MoatStep {
  std::size_t factor = 0;  // index into MoatDesign::factors
  double delta = 0.0;      // signed, unit coordinates
};

struct MoatDesign {
  std::vector<std::size_t> factors;  // space indices of the varied parameters
  std::size_t trajectories = 0;
  double delta = 0.0;
  UnitPoints unit_points;                // r(k+1) rows, k columns
  std::vector<std::optional<MoatStep>> steps;  // nullopt for trajectory bases
  std::vector<ParameterSet> sets;
};

/// Throws Error(config) for odd p, p < 2, or a grid with fewer than p points.
MoatDesign moat_design(const ParameterSpace& space, const MoatConfig& config);
std::vector<ParameterSet> moat_sample(const ParameterSpace& space, const MoatConfig& config);

/// (y_after - y_before) / delta. Throws Error(config) for delta == 0.
double elementary_effect(double y_before, double y_after, double delta);

struct ElementaryEffect {
  std::string parameter;
  double value = 0.0;
  std::size_t trajectory = 0;
};

/// One effect per non-base point, using the unit-coordinate step as divisor.
/// `outputs` holds one model output per design row.
std::vector<ElementaryEffect> elementary_effects(const ParameterSpace& space,
                                                 const MoatDesign& design,
                                                 std::span<const double> outputs);

// ---------------------------------------------------------------- VBD

struct VbdConfig {
  std::size_t sample_size = 1000;  // n
  Generator generator = Generator::lhs;
  std::uint64_t seed = 0;
};

/// Radial design: base matrices A and B (n rows each) followed by k cross
/// blocks; row i of block j is row i of B with coordinate j taken from A.
struct VbdDesign {
  std::vector<std::size_t> factors;
  UnitPoints a;
  UnitPoints b;
  UnitPoints unit_points;  // n(k+2) rows: A, B, AB_1 .. AB_k
  std::vector<ParameterSet> sets;
};

VbdDesign vbd_design(const ParameterSpace& space, const VbdConfig& config);
std::vector<ParameterSet> vbd_sample(const ParameterSpace& space, const VbdConfig& config);

// ---------------------------------------------------------------- batch files

/// `{"method":"moat","config":{...},"sets":[{"<param>":"<canonical>"}]}`
std::string moat_batch_json(const ParameterSpace& space, const MoatConfig& config,
                            const MoatDesign& design);
std::string vbd_batch_json(const ParameterSpace& space, const VbdConfig& config,
                           const VbdDesign& design);

struct Batch {
  std::string method;
  std::vector<ParameterSet> sets;
};

Batch parse_batch(std::string_view json_text);

}  // namespace reuseplan
