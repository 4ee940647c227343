#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "convscale/ir.hpp"

namespace convscale {

// Static cost analysis. One FLOP = one fused multiply-add, counted for
// conv / fc / squeeze-excitation transforms only; batch norm, activations,
// pooling and skip-adds cost zero. Parameters include BN affine pairs
// (2 per channel) and exclude BN running statistics; convs are bias-free,
// fc and SE transforms carry biases.

struct LayerCost {
  LayerInstance layer;
  std::int64_t params = 0;
  std::int64_t flops = 0;             // multiply-accumulates
  std::int64_t activation_elems = 0;  // output tensor element count
};

struct CostReport {
  std::vector<LayerCost> per_layer;
  std::int64_t total_params = 0;
  std::int64_t total_flops = 0;
  std::int64_t peak_activation_elems = 0;  // max over layer outputs and the input
  std::int64_t memory_estimate_bytes = 0;  // 4 * (total_params + peak_activation_elems)
};

std::int64_t flops_of_layer(const LayerInstance& layer);
std::int64_t params_of_layer(const LayerInstance& layer);

// 4-byte elements; peak covers every layer output plus the input tensor.
std::int64_t memory_estimate_bytes(std::int64_t total_params,
                                   std::int64_t input_elems,
                                   const std::vector<std::int64_t>& layer_output_elems);

// Per-layer costs are independent; profile computes them in an OpenMP loop
// and reduces serially. profile_serial is the reference kept for testing.
CostReport profile(const NetworkSpec& spec);
CostReport profile_serial(const NetworkSpec& spec);

// stage,layer,op,in_res,out_res,c_in,c_out,params,flops,activation_elems
std::string report_to_csv(const CostReport& report);
std::string report_to_text(const CostReport& report, const std::string& name);
std::string report_to_doc(const CostReport& report, const std::string& name);  // JSON

}  // namespace convscale
