#include "convscale/interpreter.hpp"

#include <sstream>

namespace convscale {

namespace {

using i64 = std::int64_t;

// A primitive transform inside a layer: `positions` output scalars, each the
// result of `macs_per_position` multiply-accumulates.
struct Primitive {
  i64 positions = 0;
  i64 macs_per_position = 0;
  i64 weight_elems = 0;
  i64 bias_elems = 0;
  int bn_channels = 0;
};

int walk_stride(int extent, int stride) {
  int out = 0;
  for (int i = 0; i < extent; i += stride) ++out;
  return out;
}

TensorShape strided_output(const TensorShape& in, int stride, int channels) {
  return {walk_stride(in.height, stride), walk_stride(in.width, stride), channels};
}

i64 area(const TensorShape& t) { return static_cast<i64>(t.height) * t.width; }

void expand_layer(const LayerInstance& l, const TensorShape& in, TensorShape& out,
                  std::vector<Primitive>& prims) {
  const int k = l.op.kernel;
  switch (l.op.kind) {
    case OpKind::kStem:
    case OpKind::kConv:
    case OpKind::kHead: {
      out = strided_output(in, l.stride, l.out_channels);
      prims.push_back({area(out) * l.out_channels, static_cast<i64>(k) * k * in.channels,
                       static_cast<i64>(k) * k * in.channels * l.out_channels, 0,
                       l.out_channels});
      break;
    }
    case OpKind::kDepthwiseConv: {
      out = strided_output(in, l.stride, l.out_channels);
      prims.push_back({area(out) * l.out_channels, static_cast<i64>(k) * k,
                       static_cast<i64>(k) * k * l.out_channels, 0, l.out_channels});
      break;
    }
    case OpKind::kMBConv: {
      const int c_mid = mbconv_expanded_channels(l.op.expansion, in.channels);
      TensorShape expanded = {in.height, in.width, c_mid};
      if (c_mid != in.channels) {
        prims.push_back({area(expanded) * c_mid, in.channels,
                         static_cast<i64>(in.channels) * c_mid, 0, c_mid});
      }
      TensorShape dw_out = strided_output(expanded, l.stride, c_mid);
      prims.push_back({area(dw_out) * c_mid, static_cast<i64>(k) * k,
                       static_cast<i64>(k) * k * c_mid, 0, c_mid});
      if (l.op.se_ratio > 0.0) {
        const int c_se = se_channels(l.op.se_ratio, in.channels);
        prims.push_back({c_se, c_mid, static_cast<i64>(c_mid) * c_se, c_se, 0});
        prims.push_back({c_mid, c_se, static_cast<i64>(c_se) * c_mid, c_mid, 0});
      }
      out = {dw_out.height, dw_out.width, l.out_channels};
      prims.push_back({area(out) * l.out_channels, c_mid,
                       static_cast<i64>(c_mid) * l.out_channels, 0, l.out_channels});
      break;
    }
    case OpKind::kBottleneck: {
      const int c_mid = bottleneck_mid_channels(l.op.reduction, l.out_channels);
      TensorShape reduced = {in.height, in.width, c_mid};
      prims.push_back({area(reduced) * c_mid, in.channels,
                       static_cast<i64>(in.channels) * c_mid, 0, c_mid});
      TensorShape mid = strided_output(reduced, l.stride, c_mid);
      prims.push_back({area(mid) * c_mid, static_cast<i64>(k) * k * c_mid,
                       static_cast<i64>(k) * k * c_mid * c_mid, 0, c_mid});
      out = {mid.height, mid.width, l.out_channels};
      prims.push_back({area(out) * l.out_channels, c_mid,
                       static_cast<i64>(c_mid) * l.out_channels, 0, l.out_channels});
      if (l.stride != 1 || in.channels != l.out_channels) {
        prims.push_back({area(out) * l.out_channels, in.channels,
                         static_cast<i64>(in.channels) * l.out_channels, 0,
                         l.out_channels});
      }
      break;
    }
    case OpKind::kPooling: {
      out = {1, 1, in.channels};
      break;
    }
    case OpKind::kFullyConnected: {
      out = {1, 1, l.out_channels};
      prims.push_back({l.out_channels, in.channels,
                       static_cast<i64>(in.channels) * l.out_channels, l.out_channels, 0});
      break;
    }
  }
}

}  // namespace

ShapeError::ShapeError(int layer_index, const std::string& op, const std::string& detail)
    : std::runtime_error("shape error at layer " + std::to_string(layer_index) + " (" + op +
                         "): " + detail),
      layer_index_(layer_index) {}

ExecutionTrace execute_layers(const std::vector<LayerInstance>& layers,
                              const TensorShape& input) {
  ExecutionTrace trace;
  TensorShape current = input;
  for (int i = 0; i < static_cast<int>(layers.size()); ++i) {
    const LayerInstance& l = layers[i];
    if (current.channels != l.in_channels) {
      throw ShapeError(i, op_kind_name(l.op.kind),
                       "expected " + std::to_string(l.in_channels) +
                           " input channels, got " + std::to_string(current.channels));
    }
    std::vector<Primitive> prims;
    TensorShape out;
    expand_layer(l, current, out, prims);
    LayerTrace lt;
    lt.input = current;
    lt.output = out;
    for (const Primitive& p : prims) {
      lt.macs_counted += p.positions * p.macs_per_position;
      lt.params_touched += p.weight_elems + p.bias_elems + 2 * static_cast<i64>(p.bn_channels);
    }
    trace.layers.push_back(lt);
    current = out;
  }
  trace.final_shape = current;
  return trace;
}

ExecutionTrace execute(const NetworkSpec& spec, const TensorShape& input) {
  if (input.channels != spec.input_channels) {
    throw ShapeError(0, "input",
                     "spec expects " + std::to_string(spec.input_channels) +
                         " input channels, got " + std::to_string(input.channels));
  }
  return execute_layers(flatten(spec), input);
}

ReconcileResult reconcile(const ExecutionTrace& trace, const CostReport& report) {
  ReconcileResult result;
  if (trace.layers.size() != report.per_layer.size()) {
    result.status = ReconcileStatus::kStructuralMismatch;
    result.detail = "layer count mismatch: trace has " + std::to_string(trace.layers.size()) +
                    ", report has " + std::to_string(report.per_layer.size());
    return result;
  }
  for (int i = 0; i < static_cast<int>(trace.layers.size()); ++i) {
    const LayerTrace& t = trace.layers[i];
    const LayerCost& c = report.per_layer[i];
    if (t.macs_counted != c.flops || t.params_touched != c.params) {
      result.status = ReconcileStatus::kDivergent;
      result.first_divergent_layer = i;
      std::ostringstream oss;
      oss << "layer " << i << " (" << op_kind_name(c.layer.op.kind) << "): interpreter "
          << t.macs_counted << " macs / " << t.params_touched << " params, analyzer "
          << c.flops << " flops / " << c.params << " params";
      result.detail = oss.str();
      return result;
    }
  }
  result.detail = "equal";
  return result;
}

std::string trace_to_text(const ExecutionTrace& trace) {
  std::ostringstream out;
  out << "layer,in_h,in_w,in_c,out_h,out_w,out_c,macs,params_touched\n";
  for (int i = 0; i < static_cast<int>(trace.layers.size()); ++i) {
    const LayerTrace& t = trace.layers[i];
    out << i << ',' << t.input.height << ',' << t.input.width << ',' << t.input.channels
        << ',' << t.output.height << ',' << t.output.width << ',' << t.output.channels
        << ',' << t.macs_counted << ',' << t.params_touched << '\n';
  }
  out << "final," << trace.final_shape.height << ',' << trace.final_shape.width << ','
      << trace.final_shape.channels << '\n';
  return out.str();
}

}  // namespace convscale
