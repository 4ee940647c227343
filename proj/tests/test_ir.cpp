#include "doctest.h"

#include <algorithm>
#include <numeric>
#include <random>

#include "convscale/ir.hpp"
#include "convscale/zoo.hpp"
#include "generators.hpp"

using namespace convscale;

namespace {

bool has_rule(const ValidationResult& r, const std::string& rule) {
  return std::any_of(r.violations.begin(), r.violations.end(),
                     [&](const Violation& v) { return v.rule == rule; });
}

}  // namespace

TEST_CASE("zoo specs validate cleanly") {
  for (const auto& name : zoo_names()) {
    const ValidationResult r = validate(make_network(name));
    CAPTURE(name);
    CHECK(r.ok());
  }
}

TEST_CASE("validate flags stride outside {1, 2}") {
  NetworkSpec spec = efficientnet_b0();
  spec.stages[2].stride = 3;
  const ValidationResult r = validate(spec);
  CHECK_FALSE(r.ok());
  CHECK(has_rule(r, "stride"));
  CHECK(r.violations.front().message == "stride must be 1 or 2");
  CHECK(r.violations.front().stage_index == 2);
}

TEST_CASE("validate flags fc before pooling as tail ordering") {
  NetworkSpec spec = efficientnet_b0();
  std::swap(spec.stages[spec.stages.size() - 1], spec.stages[spec.stages.size() - 2]);
  const ValidationResult r = validate(spec);
  CHECK(has_rule(r, "tail-ordering"));
}

TEST_CASE("validate flags missing tail, bad kernels, depthwise width changes") {
  NetworkSpec spec = efficientnet_b0();
  spec.stages.pop_back();
  CHECK(has_rule(validate(spec), "tail-presence"));

  spec = efficientnet_b0();
  spec.stages[0].op.kernel = 4;
  CHECK(has_rule(validate(spec), "kernel"));

  spec = resnet50();
  spec.stages[1].out_channels = 48;  // the k1 downsample stage must preserve 64
  CHECK(has_rule(validate(spec), "depthwise-channels"));

  spec = efficientnet_b0();
  spec.stages[1].op.se_ratio = 1.5;
  CHECK(has_rule(validate(spec), "se-ratio"));

  spec = efficientnet_b0();
  spec.stages[9].out_channels = 64;  // pooling must carry the head width through
  CHECK(has_rule(validate(spec), "pooling-channels"));
}

TEST_CASE("flatten b0: layer counts and the resolution trail") {
  const auto layers = flatten(efficientnet_b0());
  REQUIRE(layers.size() == 20);  // 16 mbconv + stem + head + pool + fc

  int mbconv_count = 0;
  for (const auto& l : layers)
    if (l.op.kind == OpKind::kMBConv) ++mbconv_count;
  CHECK(mbconv_count == 16);

  CHECK(layers.front().op.kind == OpKind::kStem);
  CHECK(layers.front().in_resolution == 224);
  CHECK(layers.front().out_resolution == 112);

  // stage input resolutions: 224,112,112,56,28,14,14,7,7
  const int expected_stage_in[] = {224, 112, 112, 56, 28, 14, 14, 7, 7};
  for (const auto& l : layers) {
    if (l.op.kind == OpKind::kPooling || l.op.kind == OpKind::kFullyConnected) continue;
    if (l.layer_index_in_stage == 0) {
      CAPTURE(l.stage_index);
      CHECK(l.in_resolution == expected_stage_in[l.stage_index]);
    }
  }

  const auto& last_mbconv = layers[16];
  CHECK(last_mbconv.op.kind == OpKind::kMBConv);
  CHECK(last_mbconv.out_resolution == 7);  // pre-pooling resolution
  CHECK(last_mbconv.out_channels == 320);
}

TEST_CASE("resolution 1 survives stride-2 stages: ceil(1/2) = 1") {
  NetworkSpec spec;
  spec.name = "tiny";
  spec.input_resolution = 1;
  spec.input_channels = 3;
  spec.num_classes = 2;
  spec.stages = {{{OpKind::kConv, 3}, 1, 4, 2},
                 {{OpKind::kConv, 3}, 1, 4, 2},
                 {{OpKind::kPooling}, 1, 4, 1},
                 {{OpKind::kFullyConnected}, 1, 2, 1}};
  CHECK(validate(spec).ok());
  const auto layers = flatten(spec);
  CHECK(layers[1].out_resolution == 1);
}

TEST_CASE("head must sit directly before pooling") {
  NetworkSpec spec = efficientnet_b0();
  std::swap(spec.stages[7], spec.stages[8]);  // head now before the last mbconv stage
  CHECK(has_rule(validate(spec), "head-placement"));
}

TEST_CASE("flatten: single trunk stage with repeats 1") {
  NetworkSpec spec;
  spec.name = "single";
  spec.input_resolution = 17;
  spec.input_channels = 3;
  spec.num_classes = 5;
  spec.stages = {{{OpKind::kConv, 3}, 1, 12, 1},
                 {{OpKind::kPooling}, 1, 12, 1},
                 {{OpKind::kFullyConnected}, 1, 5, 1}};
  const auto layers = flatten(spec);
  REQUIRE(layers.size() == 3);
  CHECK(layers[0].in_resolution == 17);
  CHECK(layers[0].out_resolution == 17);
  CHECK(layers[0].in_channels == 3);
}

TEST_CASE("flatten: stride-2 stage chains resolutions by ceiling division") {
  NetworkSpec spec;
  spec.name = "chain";
  spec.input_resolution = 56;
  spec.input_channels = 8;
  spec.num_classes = 2;
  spec.stages = {{{OpKind::kConv, 3}, 3, 8, 2},
                 {{OpKind::kPooling}, 1, 8, 1},
                 {{OpKind::kFullyConnected}, 1, 2, 1}};
  const auto layers = flatten(spec);
  CHECK(layers[0].in_resolution == 56);
  CHECK(layers[0].out_resolution == 28);
  CHECK(layers[1].in_resolution == 28);
  CHECK(layers[1].out_resolution == 28);
  CHECK(layers[2].out_resolution == 28);
  CHECK(layers[1].stride == 1);
  CHECK(layers[1].in_channels == layers[1].out_channels);
}

TEST_CASE("flatten rejects invalid specs with the violations attached") {
  NetworkSpec spec = efficientnet_b0();
  spec.stages[3].stride = 7;
  try {
    flatten(spec);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    REQUIRE_FALSE(e.violations().empty());
    CHECK(e.violations().front().rule == "stride");
  }
}

TEST_CASE("serialize: b0 round-trip is identity") {
  const NetworkSpec spec = efficientnet_b0();
  CHECK(deserialize(serialize(spec)) == spec);
}

TEST_CASE("round-trip ignores operator fields the kind does not use") {
  NetworkSpec spec = mobilenet_v1();
  spec.stages[6].op.kernel = 9;  // pooling has no kernel; not serialized
  CHECK(deserialize(serialize(spec)) == spec);
}

TEST_CASE("deserialize: missing stages field names the path") {
  try {
    deserialize(R"({"name":"x","input_resolution":8,"input_channels":3,"num_classes":2})");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.path() == "$.stages");
  }
}

TEST_CASE("deserialize: malformed document and missing stage fields") {
  CHECK_THROWS_AS(deserialize("not json"), ParseError);
  try {
    deserialize(
        R"({"name":"x","input_resolution":8,"input_channels":3,"num_classes":2,
            "stages":[{"op":"conv","kernel":3,"repeats":1,"stride":1}]})");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.path() == "$.stages[0].channels");
  }
}

TEST_CASE("deserialize: negative channels parse fine and fail validation") {
  const NetworkSpec spec = deserialize(
      R"({"name":"x","input_resolution":8,"input_channels":3,"num_classes":2,
          "stages":[{"op":"conv","kernel":3,"repeats":1,"channels":-5,"stride":1},
                    {"op":"pooling","repeats":1,"channels":-5,"stride":1},
                    {"op":"fc","repeats":1,"channels":2,"stride":1}]})");
  const ValidationResult r = validate(spec);
  CHECK(has_rule(r, "channels"));
}

TEST_CASE("property: round-trip, flatten length and shape chains on random specs") {
  std::mt19937 rng(20240811);
  for (int iter = 0; iter < 1000; ++iter) {
    const NetworkSpec spec = testing::random_spec(rng);
    CAPTURE(spec.name);
    REQUIRE(validate(spec).ok());
    CHECK(deserialize(serialize(spec)) == spec);

    const auto layers = flatten(spec);
    const int expected_layers = std::accumulate(
        spec.stages.begin(), spec.stages.end(), 0,
        [](int acc, const StageSpec& s) { return acc + s.repeats; });
    CHECK(static_cast<int>(layers.size()) == expected_layers);

    for (size_t i = 0; i + 1 < layers.size(); ++i) {
      CHECK(layers[i].out_resolution == layers[i + 1].in_resolution);
      CHECK(layers[i].out_channels == layers[i + 1].in_channels);
    }
    for (const auto& l : layers) {
      if (l.op.kind == OpKind::kPooling || l.op.kind == OpKind::kFullyConnected) continue;
      CHECK(l.out_resolution == ceil_div(l.in_resolution, l.stride));
      if (l.layer_index_in_stage > 0) {
        CHECK(l.stride == 1);
        CHECK(l.in_channels == l.out_channels);
      }
    }
  }
}

TEST_CASE("mbconv structural channel rules") {
  CHECK(mbconv_expanded_channels(6.0, 16) == 96);
  CHECK(mbconv_expanded_channels(1.0, 32) == 32);
  CHECK(mbconv_expanded_channels(1.5, 10) == 15);
  CHECK(se_channels(0.25, 32) == 8);
  CHECK(se_channels(0.25, 2) == 1);  // floor guard: never below 1
  CHECK(se_channels(0.0, 64) == 0);
  CHECK(bottleneck_mid_channels(4.0, 256) == 64);
}
