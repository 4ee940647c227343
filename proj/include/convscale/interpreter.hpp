#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "convscale/analyzer.hpp"
#include "convscale/ir.hpp"

namespace convscale {

// Reference shape-propagating executor over dummy tensors. No weights and no
// numeric contents: it expands every layer into primitive ops, propagates
// shapes by walking stride steps, and counts MACs / touched parameters from
// the primitives' loop bounds. It shares the IR's structural channel rules
// with the analyzer but none of its cost formulas.

struct TensorShape {
  int height = 1;
  int width = 1;
  int channels = 1;

  bool operator==(const TensorShape&) const = default;
};

struct LayerTrace {
  TensorShape input;
  TensorShape output;
  std::int64_t macs_counted = 0;
  std::int64_t params_touched = 0;
};

struct ExecutionTrace {
  std::vector<LayerTrace> layers;
  TensorShape final_shape;  // logits: 1 x 1 x num_classes
};

class ShapeError : public std::runtime_error {
 public:
  ShapeError(int layer_index, const std::string& op, const std::string& detail);
  int layer_index() const { return layer_index_; }

 private:
  int layer_index_;
};

// Throws ShapeError if the input channel count does not match the spec, or if
// any layer's declared channels disagree with the propagated tensor.
ExecutionTrace execute(const NetworkSpec& spec, const TensorShape& input);

// Same, over an explicit flattened layer list (lets tests tamper with layers).
ExecutionTrace execute_layers(const std::vector<LayerInstance>& layers,
                              const TensorShape& input);

enum class ReconcileStatus { kEqual, kDivergent, kStructuralMismatch };

struct ReconcileResult {
  ReconcileStatus status = ReconcileStatus::kEqual;
  int first_divergent_layer = -1;
  std::string detail;

  bool equal() const { return status == ReconcileStatus::kEqual; }
};

// Layer-by-layer integer comparison of trace MACs/params against report
// flops/params; reports the first divergence.
ReconcileResult reconcile(const ExecutionTrace& trace, const CostReport& report);

std::string trace_to_text(const ExecutionTrace& trace);

}  // namespace convscale
