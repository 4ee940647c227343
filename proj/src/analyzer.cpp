#include "convscale/analyzer.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"

namespace convscale {

namespace {

using i64 = std::int64_t;

struct Cost {
  i64 params = 0;
  i64 flops = 0;
};

Cost conv_cost(int k, i64 cin, i64 cout, i64 out_hw) {
  return {k * k * cin * cout + 2 * cout, out_hw * cout * k * k * cin};
}

Cost depthwise_cost(int k, i64 c, i64 out_hw) {
  return {k * k * c + 2 * c, out_hw * c * k * k};
}

Cost se_cost(i64 c_mid, i64 c_se) {
  // two 1x1 transforms at 1x1 spatial, both with biases
  return {2 * c_mid * c_se + c_se + c_mid, 2 * c_mid * c_se};
}

Cost mbconv_cost(const LayerInstance& l) {
  const i64 in_hw = static_cast<i64>(l.in_resolution) * l.in_resolution;
  const i64 out_hw = static_cast<i64>(l.out_resolution) * l.out_resolution;
  const int c_mid = mbconv_expanded_channels(l.op.expansion, l.in_channels);
  Cost total;
  if (c_mid != l.in_channels) {  // 1x1 expansion at input resolution
    total.params += static_cast<i64>(l.in_channels) * c_mid + 2 * c_mid;
    total.flops += in_hw * c_mid * l.in_channels;
  }
  total.params += static_cast<i64>(l.op.kernel) * l.op.kernel * c_mid + 2 * c_mid;
  total.flops += out_hw * c_mid * l.op.kernel * l.op.kernel;
  if (l.op.se_ratio > 0.0) {
    const int c_se = se_channels(l.op.se_ratio, l.in_channels);
    const Cost se = se_cost(c_mid, c_se);
    total.params += se.params;
    total.flops += se.flops;
  }
  total.params += static_cast<i64>(c_mid) * l.out_channels + 2 * l.out_channels;
  total.flops += out_hw * static_cast<i64>(c_mid) * l.out_channels;
  return total;
}

Cost bottleneck_cost(const LayerInstance& l) {
  const i64 in_hw = static_cast<i64>(l.in_resolution) * l.in_resolution;
  const i64 out_hw = static_cast<i64>(l.out_resolution) * l.out_resolution;
  const i64 c_mid = bottleneck_mid_channels(l.op.reduction, l.out_channels);
  Cost total;
  // 1x1 reduce at input resolution; the k x k conv carries the stride
  total.params += l.in_channels * c_mid + 2 * c_mid;
  total.flops += in_hw * c_mid * l.in_channels;
  total.params += static_cast<i64>(l.op.kernel) * l.op.kernel * c_mid * c_mid + 2 * c_mid;
  total.flops += out_hw * c_mid * c_mid * l.op.kernel * l.op.kernel;
  total.params += c_mid * l.out_channels + 2 * l.out_channels;
  total.flops += out_hw * c_mid * l.out_channels;
  if (l.stride != 1 || l.in_channels != l.out_channels) {  // projection shortcut
    total.params += static_cast<i64>(l.in_channels) * l.out_channels + 2 * l.out_channels;
    total.flops += out_hw * static_cast<i64>(l.in_channels) * l.out_channels;
  }
  return total;
}

Cost layer_cost(const LayerInstance& l) {
  const i64 out_hw = static_cast<i64>(l.out_resolution) * l.out_resolution;
  switch (l.op.kind) {
    case OpKind::kStem:
    case OpKind::kConv:
    case OpKind::kHead:
      return conv_cost(l.op.kernel, l.in_channels, l.out_channels, out_hw);
    case OpKind::kDepthwiseConv:
      return depthwise_cost(l.op.kernel, l.out_channels, out_hw);
    case OpKind::kMBConv:
      return mbconv_cost(l);
    case OpKind::kBottleneck:
      return bottleneck_cost(l);
    case OpKind::kPooling:
      return {0, 0};
    case OpKind::kFullyConnected:
      return {static_cast<i64>(l.in_channels) * l.out_channels + l.out_channels,
              static_cast<i64>(l.in_channels) * l.out_channels};
  }
  return {0, 0};
}

LayerCost cost_entry(const LayerInstance& l) {
  const Cost c = layer_cost(l);
  const i64 out_hw = static_cast<i64>(l.out_resolution) * l.out_resolution;
  return {l, c.params, c.flops, out_hw * l.out_channels};
}

CostReport reduce(const NetworkSpec& spec, std::vector<LayerCost> per_layer) {
  CostReport report;
  report.per_layer = std::move(per_layer);
  std::vector<i64> outputs;
  outputs.reserve(report.per_layer.size());
  for (const LayerCost& lc : report.per_layer) {
    report.total_params += lc.params;
    report.total_flops += lc.flops;
    outputs.push_back(lc.activation_elems);
  }
  const i64 input_elems = static_cast<i64>(spec.input_resolution) *
                          spec.input_resolution * spec.input_channels;
  report.peak_activation_elems =
      std::max(input_elems,
               outputs.empty() ? i64{0} : *std::max_element(outputs.begin(), outputs.end()));
  report.memory_estimate_bytes =
      memory_estimate_bytes(report.total_params, input_elems, outputs);
  return report;
}

}  // namespace

std::int64_t flops_of_layer(const LayerInstance& layer) { return layer_cost(layer).flops; }
std::int64_t params_of_layer(const LayerInstance& layer) { return layer_cost(layer).params; }

std::int64_t memory_estimate_bytes(std::int64_t total_params, std::int64_t input_elems,
                                   const std::vector<std::int64_t>& layer_output_elems) {
  i64 peak = input_elems;
  for (i64 e : layer_output_elems) peak = std::max(peak, e);
  return 4 * (total_params + peak);
}

CostReport profile(const NetworkSpec& spec) {
  const std::vector<LayerInstance> layers = flatten(spec);
  std::vector<LayerCost> per_layer(layers.size());
  const int n = static_cast<int>(layers.size());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) per_layer[i] = cost_entry(layers[i]);
  return reduce(spec, std::move(per_layer));
}

CostReport profile_serial(const NetworkSpec& spec) {
  const std::vector<LayerInstance> layers = flatten(spec);
  std::vector<LayerCost> per_layer;
  per_layer.reserve(layers.size());
  for (const LayerInstance& l : layers) per_layer.push_back(cost_entry(l));
  return reduce(spec, std::move(per_layer));
}

std::string report_to_csv(const CostReport& report) {
  std::ostringstream out;
  out << "stage,layer,op,in_res,out_res,c_in,c_out,params,flops,activation_elems\n";
  for (const LayerCost& lc : report.per_layer) {
    const LayerInstance& l = lc.layer;
    out << l.stage_index << ',' << l.layer_index_in_stage << ',' << op_kind_name(l.op.kind)
        << ',' << l.in_resolution << ',' << l.out_resolution << ',' << l.in_channels << ','
        << l.out_channels << ',' << lc.params << ',' << lc.flops << ','
        << lc.activation_elems << '\n';
  }
  return out.str();
}

std::string report_to_text(const CostReport& report, const std::string& name) {
  std::ostringstream out;
  out << "network: " << name << '\n'
      << "layers: " << report.per_layer.size() << '\n'
      << "total params: " << report.total_params << '\n'
      << "total flops (MACs): " << report.total_flops << '\n'
      << "peak activation elems: " << report.peak_activation_elems << '\n'
      << "memory estimate bytes: " << report.memory_estimate_bytes << '\n';
  return out.str();
}

std::string report_to_doc(const CostReport& report, const std::string& name) {
  nlohmann::ordered_json j;
  j["network"] = name;
  j["total_params"] = report.total_params;
  j["total_flops"] = report.total_flops;
  j["peak_activation_elems"] = report.peak_activation_elems;
  j["memory_estimate_bytes"] = report.memory_estimate_bytes;
  j["per_layer"] = nlohmann::ordered_json::array();
  for (const LayerCost& lc : report.per_layer) {
    nlohmann::ordered_json lj;
    lj["stage"] = lc.layer.stage_index;
    lj["layer"] = lc.layer.layer_index_in_stage;
    lj["op"] = op_kind_name(lc.layer.op.kind);
    lj["in_res"] = lc.layer.in_resolution;
    lj["out_res"] = lc.layer.out_resolution;
    lj["c_in"] = lc.layer.in_channels;
    lj["c_out"] = lc.layer.out_channels;
    lj["params"] = lc.params;
    lj["flops"] = lc.flops;
    lj["activation_elems"] = lc.activation_elems;
    j["per_layer"].push_back(lj);
  }
  return j.dump(2) + "\n";
}

}  // namespace convscale
