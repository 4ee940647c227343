#include "convscale/ir.hpp"

#include <cmath>
#include <algorithm>
#include <sstream>

#include "json.hpp"

namespace convscale {

using ordered_json = nlohmann::ordered_json;

const char* op_kind_name(OpKind kind) {
  switch (kind) {
    case OpKind::kStem: return "stem";
    case OpKind::kConv: return "conv";
    case OpKind::kDepthwiseConv: return "dwconv";
    case OpKind::kMBConv: return "mbconv";
    case OpKind::kBottleneck: return "bottleneck";
    case OpKind::kPooling: return "pooling";
    case OpKind::kFullyConnected: return "fc";
    case OpKind::kHead: return "head";
  }
  return "?";
}

bool Operator::operator==(const Operator& other) const {
  if (kind != other.kind) return false;
  switch (kind) {
    case OpKind::kPooling:
    case OpKind::kFullyConnected:
      return true;
    case OpKind::kMBConv:
      return kernel == other.kernel && expansion == other.expansion &&
             se_ratio == other.se_ratio;
    case OpKind::kBottleneck:
      return kernel == other.kernel && reduction == other.reduction;
    default:
      return kernel == other.kernel;
  }
}

ValidationError::ValidationError(std::string what, std::vector<Violation> v)
    : std::runtime_error(std::move(what)), violations_(std::move(v)) {}

ParseError::ParseError(const std::string& path, const std::string& detail)
    : std::runtime_error("parse error at '" + path + "': " + detail), path_(path) {}

int mbconv_expanded_channels(double expansion, int in_channels) {
  return std::max(1, static_cast<int>(std::llround(expansion * in_channels)));
}

int se_channels(double se_ratio, int in_channels) {
  if (se_ratio <= 0.0) return 0;
  return std::max(1, static_cast<int>(std::llround(se_ratio * in_channels)));
}

int bottleneck_mid_channels(double reduction, int out_channels) {
  return std::max(1, static_cast<int>(std::llround(out_channels / reduction)));
}

namespace {

bool is_conv_like(OpKind k) {
  return k == OpKind::kStem || k == OpKind::kConv || k == OpKind::kDepthwiseConv ||
         k == OpKind::kMBConv || k == OpKind::kBottleneck || k == OpKind::kHead;
}

bool is_tail(OpKind k) { return k == OpKind::kPooling || k == OpKind::kFullyConnected; }

}  // namespace

ValidationResult validate(const NetworkSpec& spec) {
  ValidationResult result;
  auto add = [&](int stage, std::string rule, std::string msg) {
    result.violations.push_back({stage, std::move(rule), std::move(msg)});
  };

  if (spec.input_resolution < 1)
    add(-1, "input-resolution", "input_resolution must be >= 1");
  if (spec.input_channels < 1) add(-1, "input-channels", "input_channels must be >= 1");
  if (spec.num_classes < 1) add(-1, "num-classes", "num_classes must be >= 1");

  const int n = static_cast<int>(spec.stages.size());
  int pooling_count = 0;
  int fc_count = 0;
  int prev_channels = spec.input_channels;
  int resolution = std::max(1, spec.input_resolution);

  for (int i = 0; i < n; ++i) {
    const StageSpec& s = spec.stages[i];
    const Operator& op = s.op;

    if (s.repeats < 1) add(i, "repeats", "repeats must be >= 1");
    if (s.out_channels < 1) add(i, "channels", "out_channels must be >= 1");
    if (s.stride != 1 && s.stride != 2) add(i, "stride", "stride must be 1 or 2");

    if (is_conv_like(op.kind)) {
      if (op.kernel < 1 || op.kernel % 2 == 0)
        add(i, "kernel", "kernel must be odd and >= 1");
    }
    if (op.kind == OpKind::kMBConv) {
      if (op.expansion < 1.0) add(i, "expansion", "expansion_ratio must be >= 1");
      if (op.se_ratio < 0.0 || op.se_ratio > 1.0)
        add(i, "se-ratio", "se_ratio must lie in [0, 1]");
    }
    if (op.kind == OpKind::kBottleneck && op.reduction <= 0.0)
      add(i, "reduction", "reduction must be positive");

    if (op.kind == OpKind::kDepthwiseConv && s.out_channels != prev_channels)
      add(i, "depthwise-channels", "depthwise stage must preserve channels");
    if (op.kind == OpKind::kStem && i != 0)
      add(i, "stem-placement", "stem may only open the network");
    if (op.kind == OpKind::kHead) {
      if (i + 1 >= n || spec.stages[i + 1].op.kind != OpKind::kPooling)
        add(i, "head-placement", "head must directly precede pooling");
    }
    if (op.kind == OpKind::kStem || op.kind == OpKind::kHead || is_tail(op.kind)) {
      if (s.repeats != 1) add(i, "singleton-repeats", "stage kind admits repeats = 1 only");
    }
    if (op.kind == OpKind::kPooling) {
      ++pooling_count;
      if (s.out_channels != prev_channels)
        add(i, "pooling-channels", "pooling must preserve channels");
    }
    if (op.kind == OpKind::kFullyConnected) {
      ++fc_count;
      if (s.out_channels != spec.num_classes && s.out_channels >= 1)
        add(i, "fc-channels", "fc out_channels must equal num_classes");
    }

    if (is_conv_like(op.kind)) {
      if (s.stride == 2) resolution = ceil_div(resolution, 2);
      if (resolution < 1) add(i, "resolution-underflow", "resolution underflow");
    }
    prev_channels = s.out_channels;
  }

  if (pooling_count != 1 || fc_count != 1) {
    add(-1, "tail-presence", "exactly one pooling and one fc stage are required");
  } else {
    const bool tail_ok = n >= 2 &&
                         spec.stages[n - 2].op.kind == OpKind::kPooling &&
                         spec.stages[n - 1].op.kind == OpKind::kFullyConnected;
    if (!tail_ok) add(-1, "tail-ordering", "tail ordering: pooling then fc must close the network");
  }

  return result;
}

std::vector<LayerInstance> flatten(const NetworkSpec& spec) {
  ValidationResult v = validate(spec);
  if (!v.ok()) {
    std::ostringstream oss;
    oss << "invalid spec '" << spec.name << "': " << v.violations.size() << " violation(s);"
        << " first: " << v.violations.front().message;
    throw ValidationError(oss.str(), std::move(v.violations));
  }

  std::vector<LayerInstance> layers;
  int channels = spec.input_channels;
  int resolution = spec.input_resolution;
  for (int i = 0; i < static_cast<int>(spec.stages.size()); ++i) {
    const StageSpec& s = spec.stages[i];
    for (int j = 0; j < s.repeats; ++j) {
      LayerInstance layer;
      layer.stage_index = i;
      layer.layer_index_in_stage = j;
      layer.op = s.op;
      layer.stride = (j == 0) ? s.stride : 1;
      layer.in_channels = (j == 0) ? channels : s.out_channels;
      layer.out_channels = s.out_channels;
      layer.in_resolution = resolution;
      switch (s.op.kind) {
        case OpKind::kPooling:
        case OpKind::kFullyConnected:
          layer.out_resolution = 1;
          layer.out_channels = (s.op.kind == OpKind::kPooling) ? channels : spec.num_classes;
          layer.in_channels = channels;
          break;
        default:
          layer.out_resolution = ceil_div(resolution, layer.stride);
          break;
      }
      resolution = layer.out_resolution;
      channels = layer.out_channels;
      layers.push_back(layer);
    }
  }
  return layers;
}

namespace {

ordered_json stage_to_json(const StageSpec& s) {
  ordered_json j;
  j["op"] = op_kind_name(s.op.kind);
  if (is_conv_like(s.op.kind)) j["kernel"] = s.op.kernel;
  if (s.op.kind == OpKind::kMBConv) {
    j["expansion"] = s.op.expansion;
    j["se_ratio"] = s.op.se_ratio;
  }
  if (s.op.kind == OpKind::kBottleneck) j["reduction"] = s.op.reduction;
  j["repeats"] = s.repeats;
  j["channels"] = s.out_channels;
  j["stride"] = s.stride;
  return j;
}

OpKind op_kind_from_name(const std::string& name, const std::string& path) {
  for (OpKind k : {OpKind::kStem, OpKind::kConv, OpKind::kDepthwiseConv, OpKind::kMBConv,
                   OpKind::kBottleneck, OpKind::kPooling, OpKind::kFullyConnected,
                   OpKind::kHead}) {
    if (name == op_kind_name(k)) return k;
  }
  throw ParseError(path, "unknown operator '" + name + "'");
}

template <typename T>
T require(const ordered_json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) throw ParseError(path + "." + key, "missing field");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + "." + key, e.what());
  }
}

}  // namespace

std::string serialize(const NetworkSpec& spec) {
  ordered_json j;
  j["name"] = spec.name;
  j["input_resolution"] = spec.input_resolution;
  j["input_channels"] = spec.input_channels;
  j["num_classes"] = spec.num_classes;
  j["stages"] = ordered_json::array();
  for (const StageSpec& s : spec.stages) j["stages"].push_back(stage_to_json(s));
  return j.dump(2) + "\n";
}

NetworkSpec deserialize(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("$", e.what());
  }
  NetworkSpec spec;
  spec.name = require<std::string>(j, "name", "$");
  spec.input_resolution = require<int>(j, "input_resolution", "$");
  spec.input_channels = require<int>(j, "input_channels", "$");
  spec.num_classes = require<int>(j, "num_classes", "$");
  if (!j.contains("stages")) throw ParseError("$.stages", "missing field");
  if (!j["stages"].is_array()) throw ParseError("$.stages", "expected an array");
  int idx = 0;
  for (const auto& sj : j["stages"]) {
    const std::string path = "$.stages[" + std::to_string(idx) + "]";
    StageSpec s;
    s.op.kind = op_kind_from_name(require<std::string>(sj, "op", path), path + ".op");
    if (is_conv_like(s.op.kind)) s.op.kernel = require<int>(sj, "kernel", path);
    if (s.op.kind == OpKind::kMBConv) {
      s.op.expansion = require<double>(sj, "expansion", path);
      s.op.se_ratio = require<double>(sj, "se_ratio", path);
    }
    if (s.op.kind == OpKind::kBottleneck)
      s.op.reduction = require<double>(sj, "reduction", path);
    s.repeats = require<int>(sj, "repeats", path);
    s.out_channels = require<int>(sj, "channels", path);
    s.stride = require<int>(sj, "stride", path);
    spec.stages.push_back(s);
    ++idx;
  }
  return spec;
}

}  // namespace convscale
