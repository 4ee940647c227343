#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace convscale {

// Staged ConvNet description: a network is an ordered list of stages, each
// repeating one operator; only the first layer of a stage may down-sample
// or change the channel count. Costs and shapes are fully determined by the
// spec -- there are no weights or tensors here.

enum class OpKind {
  kStem,            // leading full conv (k x k, maps input_channels)
  kConv,            // regular conv, k x k
  kDepthwiseConv,   // channel-wise conv, preserves channels
  kMBConv,          // inverted bottleneck: 1x1 expand, k x k depthwise,
                    // squeeze-excitation, 1x1 project, skip when shape-preserving
  kBottleneck,      // residual bottleneck: 1x1 reduce, k x k (stride), 1x1 expand,
                    // projection on shape change, skip otherwise
  kPooling,         // global average pool (tail)
  kFullyConnected,  // classifier (tail)
  kHead,            // trailing 1x1 conv before pooling
};

const char* op_kind_name(OpKind kind);

struct Operator {
  OpKind kind = OpKind::kConv;
  int kernel = 1;          // odd, >= 1; ignored for pooling / fc
  double expansion = 1.0;  // mbconv expansion ratio, >= 1
  double se_ratio = 0.0;   // mbconv squeeze-excitation ratio in [0, 1]; 0 disables
  double reduction = 4.0;  // bottleneck mid-width divisor (mid = out / reduction)

  // compares only the fields the kind actually uses
  bool operator==(const Operator& other) const;
};

struct StageSpec {
  Operator op;
  int repeats = 1;       // layers in the stage, >= 1
  int out_channels = 1;  // >= 1
  int stride = 1;        // 1 or 2, applied to the first layer only

  bool operator==(const StageSpec&) const = default;
};

struct NetworkSpec {
  std::string name;
  int input_resolution = 1;  // square inputs: H = W
  int input_channels = 1;
  int num_classes = 1;
  std::vector<StageSpec> stages;

  bool operator==(const NetworkSpec&) const = default;
};

// Flattened per-layer view used by the analyzer and the interpreter.
struct LayerInstance {
  int stage_index = 0;
  int layer_index_in_stage = 0;
  int in_channels = 0;
  int out_channels = 0;
  int in_resolution = 0;
  int out_resolution = 0;
  Operator op;
  int stride = 1;

  bool operator==(const LayerInstance&) const = default;
};

struct Violation {
  int stage_index = -1;  // -1 for network-level rules
  std::string rule;      // short machine-checkable slug
  std::string message;

  bool operator==(const Violation&) const = default;
};

struct ValidationResult {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string what, std::vector<Violation> v);
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& path, const std::string& detail);
  const std::string& path() const { return path_; }

 private:
  std::string path_;  // field path, e.g. "stages[3].channels"
};

// Violations are values, not failures: an invalid spec yields a non-empty list.
ValidationResult validate(const NetworkSpec& spec);

// One LayerInstance per repeated layer, shapes chained with out = ceil(in / stride).
// Throws ValidationError on an invalid spec.
std::vector<LayerInstance> flatten(const NetworkSpec& spec);

// Canonical JSON document; deserialize(serialize(s)) is structurally s.
std::string serialize(const NetworkSpec& spec);
NetworkSpec deserialize(const std::string& text);  // throws ParseError

inline constexpr int ceil_div(int a, int b) { return (a + b - 1) / b; }

// Structural channel rules shared by every consumer of the IR. These size the
// internal widths of compound operators; the cost formulas stay per-module.
int mbconv_expanded_channels(double expansion, int in_channels);
int se_channels(double se_ratio, int in_channels);
int bottleneck_mid_channels(double reduction, int out_channels);

}  // namespace convscale
