#pragma once

#include <string>
#include <vector>

#include "convscale/ir.hpp"
#include "convscale/scaling.hpp"

namespace convscale {

// Generators for the built-in architectures and the scaled model family.

NetworkSpec efficientnet_b0();
NetworkSpec mobilenet_v1();
NetworkSpec mobilenet_v2();
NetworkSpec resnet50();

struct FamilyVariant {
  std::string name;
  ScaleTriple triple;
  int input_resolution = 224;
  double dropout = 0.2;
};

struct FamilySpec {
  NetworkSpec base;
  std::vector<FamilyVariant> variants;  // b0 .. b7
};

// b0..b7: depth/width follow (1.2, 1.1)^phi with per-variant calibrated phi
// and an explicit input resolution (see family_constants.inc).
FamilySpec efficientnet_family();

// Linear schedule from 0.2 at index 0 to 0.5 at index 7.
// Throws std::out_of_range outside [0, 7].
double dropout_rate(int model_index);

// Scaled spec for one family variant (depth/width from the triple, resolution
// pinned to the variant's input_resolution).
NetworkSpec materialize(const FamilySpec& family, const FamilyVariant& variant);

std::vector<std::string> zoo_names();
NetworkSpec make_network(const std::string& name);  // throws std::invalid_argument

}  // namespace convscale
