#pragma once

#include "convscale/ir.hpp"

namespace convscale {

// Depth / width / resolution multipliers applied uniformly across stages.
struct ScaleTriple {
  double d = 1.0;
  double w = 1.0;
  double r = 1.0;

  bool operator==(const ScaleTriple&) const = default;
};

// Generates a ScaleTriple as (alpha^phi, beta^phi, gamma^phi). A config is
// "constrained" when alpha * beta^2 * gamma^2 stays within tolerance of 2.
struct CompoundConfig {
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;
  double phi = 0.0;
  double constraint_tolerance = 0.05;

  bool operator==(const CompoundConfig&) const = default;
};

enum class DepthRounding {
  kCeiling,  // repeats' = ceil(d * repeats): never below the baseline layer count
  kNearest,  // repeats' = max(1, round(d * repeats))
};

struct RoundingPolicy {
  int channel_multiple = 8;
  double channel_floor_guard = 0.9;  // result >= guard * raw
  DepthRounding depth_rounding = DepthRounding::kCeiling;
  // resolution rounding is nearest-int, unconditionally
};

ScaleTriple triple_from_compound(const CompoundConfig& cfg);

// (alpha * beta^2 * gamma^2)^phi: the factor total FLOPS grows by, 2^phi for
// a constrained config.
double predicted_flops_ratio(const CompoundConfig& cfg);

double constraint_product(const CompoundConfig& cfg);  // alpha * beta^2 * gamma^2
bool satisfies_constraint(const CompoundConfig& cfg);

// Nearest positive multiple of policy.channel_multiple that is >= guard * raw;
// ties round up.
int round_channels(double raw, const RoundingPolicy& policy = {});

int scaled_repeats(double d, int repeats, const RoundingPolicy& policy = {});
int scaled_resolution(double r, int resolution);

// Uniformly scales a spec: per stage repeats' and channels' per the policy,
// input resolution by r. Operator kinds, kernels, strides, expansion and SE
// ratios, stage count and the class count are untouched. Stem and head
// channels scale with w like stage channels; stem/head/pooling/fc are single
// layers and do not depth-scale. Throws ValidationError if either the input
// or the scaled spec is invalid.
NetworkSpec apply_scale(const NetworkSpec& spec, const ScaleTriple& t,
                        const RoundingPolicy& policy = {});

}  // namespace convscale
