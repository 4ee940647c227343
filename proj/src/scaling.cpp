#include "convscale/scaling.hpp"

#include <cmath>
#include <algorithm>

namespace convscale {

ScaleTriple triple_from_compound(const CompoundConfig& cfg) {
  return {std::pow(cfg.alpha, cfg.phi), std::pow(cfg.beta, cfg.phi),
          std::pow(cfg.gamma, cfg.phi)};
}

double constraint_product(const CompoundConfig& cfg) {
  return cfg.alpha * cfg.beta * cfg.beta * cfg.gamma * cfg.gamma;
}

bool satisfies_constraint(const CompoundConfig& cfg) {
  return std::abs(constraint_product(cfg) - 2.0) <= cfg.constraint_tolerance;
}

double predicted_flops_ratio(const CompoundConfig& cfg) {
  return std::pow(constraint_product(cfg), cfg.phi);
}

int round_channels(double raw, const RoundingPolicy& policy) {
  const int m = policy.channel_multiple;
  const double guard = policy.channel_floor_guard * raw;
  const long long base = static_cast<long long>(std::floor(raw / m));
  int best = 0;
  double best_dist = 0.0;
  for (long long k = std::max(1LL, base - 1); k <= base + 2; ++k) {
    const int c = static_cast<int>(k * m);
    if (c + 1e-9 < guard) continue;
    const double dist = std::abs(c - raw);
    if (best == 0 || dist < best_dist - 1e-9 ||
        (std::abs(dist - best_dist) <= 1e-9 && c > best)) {
      best = c;
      best_dist = dist;
    }
  }
  return best;
}

int scaled_repeats(double d, int repeats, const RoundingPolicy& policy) {
  const double raw = d * repeats;
  if (policy.depth_rounding == DepthRounding::kCeiling)
    return std::max(1, static_cast<int>(std::ceil(raw - 1e-9)));
  return std::max(1, static_cast<int>(std::llround(raw)));
}

int scaled_resolution(double r, int resolution) {
  return std::max(1, static_cast<int>(std::llround(r * resolution)));
}

NetworkSpec apply_scale(const NetworkSpec& spec, const ScaleTriple& t,
                        const RoundingPolicy& policy) {
  {
    ValidationResult v = validate(spec);
    if (!v.ok())
      throw ValidationError("apply_scale: input spec is invalid", std::move(v.violations));
  }

  NetworkSpec scaled = spec;
  scaled.input_resolution = scaled_resolution(t.r, spec.input_resolution);
  int prev_channels = spec.input_channels;  // unscaled: input planes are data
  for (StageSpec& s : scaled.stages) {
    switch (s.op.kind) {
      case OpKind::kPooling:
        s.out_channels = prev_channels;
        continue;
      case OpKind::kFullyConnected:
        continue;  // class count never scales
      case OpKind::kStem:
      case OpKind::kHead:
        s.out_channels = round_channels(t.w * s.out_channels, policy);
        break;
      case OpKind::kDepthwiseConv:
        s.out_channels = prev_channels;  // preserves whatever width arrives
        s.repeats = scaled_repeats(t.d, s.repeats, policy);
        break;
      default:
        s.out_channels = round_channels(t.w * s.out_channels, policy);
        s.repeats = scaled_repeats(t.d, s.repeats, policy);
        break;
    }
    prev_channels = s.out_channels;
  }

  {
    ValidationResult v = validate(scaled);
    if (!v.ok())
      throw ValidationError("apply_scale: scaled spec is invalid", std::move(v.violations));
  }
  return scaled;
}

}  // namespace convscale
