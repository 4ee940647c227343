#include "convscale/zoo.hpp"

#include <cmath>
#include <stdexcept>

namespace convscale {

namespace {

Operator stem(int k) { return {OpKind::kStem, k}; }
Operator dwconv(int k) { return {OpKind::kDepthwiseConv, k}; }
Operator mbconv(int k, double expansion, double se) {
  return {OpKind::kMBConv, k, expansion, se};
}
Operator bottleneck(int k, double reduction) {
  Operator op{OpKind::kBottleneck, k};
  op.reduction = reduction;
  return op;
}
Operator head() { return {OpKind::kHead, 1}; }
Operator pooling() { return {OpKind::kPooling}; }
Operator fc() { return {OpKind::kFullyConnected}; }

constexpr double kFamilyAlpha = 1.2;
constexpr double kFamilyBeta = 1.1;

struct FamilyConstant {
  const char* name;
  double phi;
  int input_resolution;
};

constexpr FamilyConstant kFamilyConstants[] = {
#include "family_constants.inc"
};

}  // namespace

NetworkSpec efficientnet_b0() {
  NetworkSpec spec;
  spec.name = "efficientnet-b0";
  spec.input_resolution = 224;
  spec.input_channels = 3;
  spec.num_classes = 1000;
  spec.stages = {
      {stem(3), 1, 32, 2},
      {mbconv(3, 1.0, 0.25), 1, 16, 1},
      {mbconv(3, 6.0, 0.25), 2, 24, 2},
      {mbconv(5, 6.0, 0.25), 2, 40, 2},
      {mbconv(3, 6.0, 0.25), 3, 80, 2},
      {mbconv(5, 6.0, 0.25), 3, 112, 1},
      {mbconv(5, 6.0, 0.25), 4, 192, 2},
      {mbconv(3, 6.0, 0.25), 1, 320, 1},
      {head(), 1, 1280, 1},
      {pooling(), 1, 1280, 1},
      {fc(), 1, 1000, 1},
  };
  return spec;
}

NetworkSpec mobilenet_v1() {
  // depthwise-separable blocks are mbconv with expansion 1 and no SE
  NetworkSpec spec;
  spec.name = "mobilenet-v1";
  spec.input_resolution = 224;
  spec.input_channels = 3;
  spec.num_classes = 1000;
  spec.stages = {
      {stem(3), 1, 32, 2},
      {mbconv(3, 1.0, 0.0), 1, 64, 1},
      {mbconv(3, 1.0, 0.0), 2, 128, 2},
      {mbconv(3, 1.0, 0.0), 2, 256, 2},
      {mbconv(3, 1.0, 0.0), 6, 512, 2},
      {mbconv(3, 1.0, 0.0), 2, 1024, 2},
      {pooling(), 1, 1024, 1},
      {fc(), 1, 1000, 1},
  };
  return spec;
}

NetworkSpec mobilenet_v2() {
  NetworkSpec spec;
  spec.name = "mobilenet-v2";
  spec.input_resolution = 224;
  spec.input_channels = 3;
  spec.num_classes = 1000;
  spec.stages = {
      {stem(3), 1, 32, 2},
      {mbconv(3, 1.0, 0.0), 1, 16, 1},
      {mbconv(3, 6.0, 0.0), 2, 24, 2},
      {mbconv(3, 6.0, 0.0), 3, 32, 2},
      {mbconv(3, 6.0, 0.0), 4, 64, 2},
      {mbconv(3, 6.0, 0.0), 3, 96, 1},
      {mbconv(3, 6.0, 0.0), 3, 160, 2},
      {mbconv(3, 6.0, 0.0), 1, 320, 1},
      {head(), 1, 1280, 1},
      {pooling(), 1, 1280, 1},
      {fc(), 1, 1000, 1},
  };
  return spec;
}

NetworkSpec resnet50() {
  // The 1x1 stride-2 depthwise stage stands in for the 3x3 max-pool after the
  // stem: identical output shape, near-zero cost.
  NetworkSpec spec;
  spec.name = "resnet-50";
  spec.input_resolution = 224;
  spec.input_channels = 3;
  spec.num_classes = 1000;
  spec.stages = {
      {stem(7), 1, 64, 2},
      {dwconv(1), 1, 64, 2},
      {bottleneck(3, 4.0), 3, 256, 1},
      {bottleneck(3, 4.0), 4, 512, 2},
      {bottleneck(3, 4.0), 6, 1024, 2},
      {bottleneck(3, 4.0), 3, 2048, 2},
      {pooling(), 1, 2048, 1},
      {fc(), 1, 1000, 1},
  };
  return spec;
}

double dropout_rate(int model_index) {
  if (model_index < 0 || model_index > 7)
    throw std::out_of_range("dropout_rate: model index must lie in [0, 7]");
  return 0.2 + 0.3 * model_index / 7.0;
}

FamilySpec efficientnet_family() {
  FamilySpec family;
  family.base = efficientnet_b0();
  family.variants.push_back(
      {"efficientnet-b0", {1.0, 1.0, 1.0}, family.base.input_resolution, dropout_rate(0)});
  int index = 1;
  for (const FamilyConstant& c : kFamilyConstants) {
    FamilyVariant v;
    v.name = c.name;
    v.triple = {std::pow(kFamilyAlpha, c.phi), std::pow(kFamilyBeta, c.phi),
                static_cast<double>(c.input_resolution) / family.base.input_resolution};
    v.input_resolution = c.input_resolution;
    v.dropout = dropout_rate(index);
    family.variants.push_back(v);
    ++index;
  }
  return family;
}

NetworkSpec materialize(const FamilySpec& family, const FamilyVariant& variant) {
  NetworkSpec spec = apply_scale(family.base, {variant.triple.d, variant.triple.w, 1.0});
  spec.input_resolution = variant.input_resolution;
  spec.name = variant.name;
  return spec;
}

std::vector<std::string> zoo_names() {
  std::vector<std::string> names;
  for (const FamilyVariant& v : efficientnet_family().variants) names.push_back(v.name);
  names.push_back("mobilenet-v1");
  names.push_back("mobilenet-v2");
  names.push_back("resnet-50");
  return names;
}

NetworkSpec make_network(const std::string& name) {
  if (name == "mobilenet-v1") return mobilenet_v1();
  if (name == "mobilenet-v2") return mobilenet_v2();
  if (name == "resnet-50") return resnet50();
  const FamilySpec family = efficientnet_family();
  for (const FamilyVariant& v : family.variants) {
    if (v.name == name) return materialize(family, v);
  }
  throw std::invalid_argument("unknown network '" + name + "'");
}

}  // namespace convscale
