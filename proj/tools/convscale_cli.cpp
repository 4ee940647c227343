#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "convscale/analyzer.hpp"
#include "convscale/interpreter.hpp"
#include "convscale/ir.hpp"
#include "convscale/scaling.hpp"
#include "convscale/search.hpp"
#include "convscale/zoo.hpp"

namespace {

using convscale::CompoundConfig;
using convscale::CostReport;
using convscale::NetworkSpec;
using convscale::RoundingPolicy;
using ordered_json = nlohmann::ordered_json;

struct CliError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError("file not found: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw CliError("cannot write: " + out_path);
  out << text;
}

NetworkSpec load_spec(const std::string& path) {
  return convscale::deserialize(read_file(path));
}

RoundingPolicy policy_from_flag(const std::string& depth_rounding) {
  RoundingPolicy policy;
  if (depth_rounding == "nearest")
    policy.depth_rounding = convscale::DepthRounding::kNearest;
  else if (depth_rounding != "ceiling")
    throw CliError("unknown depth rounding '" + depth_rounding + "'");
  return policy;
}

convscale::SearchSpec search_spec_from_json(const ordered_json& j) {
  convscale::SearchSpec spec;
  auto range = [&](const char* key, convscale::GridRange fallback) {
    if (!j.contains(key)) return fallback;
    const auto& r = j.at(key);
    return convscale::GridRange{r.value("lo", fallback.lo), r.value("hi", fallback.hi),
                                r.value("step", fallback.step)};
  };
  spec.alpha_range = range("alpha", spec.alpha_range);
  spec.beta_range = range("beta", spec.beta_range);
  spec.gamma_range = range("gamma", spec.gamma_range);
  spec.constraint_tolerance = j.value("constraint_tolerance", spec.constraint_tolerance);
  if (j.contains("target_flops") && !j.at("target_flops").is_null())
    spec.target_flops = j.at("target_flops").get<std::int64_t>();
  if (j.contains("target_memory_bytes") && !j.at("target_memory_bytes").is_null())
    spec.target_memory_bytes = j.at("target_memory_bytes").get<std::int64_t>();
  spec.phi_for_eval = j.value("phi_for_eval", spec.phi_for_eval);
  if (j.value("depth_rounding", "ceiling") == std::string("nearest"))
    spec.policy.depth_rounding = convscale::DepthRounding::kNearest;
  return spec;
}

convscale::Evaluator evaluator_from_config(const std::string& name, const ordered_json& config,
                                           const NetworkSpec& base,
                                           const convscale::SearchSpec& spec) {
  if (name == "constant") return convscale::make_constant_evaluator();
  if (name == "neg-flops") return convscale::make_neg_flops_evaluator();
  if (name == "flops-objective") return convscale::make_flops_objective_evaluator();
  if (name == "synthetic-peak") {
    CompoundConfig target{1.2, 1.1, 1.15, spec.phi_for_eval};
    if (config.contains("evaluator")) {
      const auto& e = config.at("evaluator");
      target.alpha = e.value("alpha", target.alpha);
      target.beta = e.value("beta", target.beta);
      target.gamma = e.value("gamma", target.gamma);
    }
    return convscale::make_synthetic_peak_evaluator(base, target, spec.phi_for_eval,
                                                    spec.policy);
  }
  throw CliError("unknown evaluator '" + name + "'");
}

int run_generate(const std::string& model, const std::string& out_path) {
  write_output(convscale::serialize(convscale::make_network(model)), out_path);
  return 0;
}

int run_scale(const std::string& spec_path, std::optional<double> d, std::optional<double> w,
              std::optional<double> r, std::optional<double> alpha,
              std::optional<double> beta, std::optional<double> gamma,
              std::optional<double> phi, const std::string& depth_rounding,
              const std::string& out_path) {
  const bool triple_given = d || w || r;
  const bool compound_given = alpha || beta || gamma || phi;
  if (triple_given == compound_given)
    throw CLI::ValidationError(
        "scale", "give either --d/--w/--r or --alpha/--beta/--gamma/--phi");
  convscale::ScaleTriple triple{d.value_or(1.0), w.value_or(1.0), r.value_or(1.0)};
  if (compound_given) {
    CompoundConfig cfg{alpha.value_or(1.0), beta.value_or(1.0), gamma.value_or(1.0),
                       phi.value_or(1.0)};
    triple = convscale::triple_from_compound(cfg);
  }
  const NetworkSpec spec = load_spec(spec_path);
  NetworkSpec scaled = convscale::apply_scale(spec, triple, policy_from_flag(depth_rounding));
  scaled.name = spec.name + "-scaled";
  write_output(convscale::serialize(scaled), out_path);
  return 0;
}

int run_profile(const std::string& spec_path, const std::string& format) {
  const NetworkSpec spec = load_spec(spec_path);
  const CostReport report = convscale::profile(spec);
  if (format == "csv")
    std::cout << convscale::report_to_csv(report);
  else if (format == "doc")
    std::cout << convscale::report_to_doc(report, spec.name);
  else
    std::cout << convscale::report_to_text(report, spec.name);
  return 0;
}

int run_search(const std::string& config_path, const std::string& evaluator_name, bool serial,
               const std::string& format) {
  ordered_json config = ordered_json::parse(read_file(config_path));
  const convscale::SearchSpec spec = search_spec_from_json(config);
  const NetworkSpec base = config.contains("base") && config.at("base").is_string()
                               ? convscale::make_network(config.at("base").get<std::string>())
                               : convscale::efficientnet_b0();
  std::string name = evaluator_name;
  if (name.empty())
    name = config.contains("evaluator") ? config.at("evaluator").value("name", "constant")
                                        : std::string("constant");
  const convscale::Evaluator evaluate = evaluator_from_config(name, config, base, spec);
  const convscale::SearchResult result = convscale::grid_search(
      base, spec, evaluate,
      serial ? convscale::ExecutionMode::kSerial : convscale::ExecutionMode::kParallel);
  if (format == "csv")
    std::cout << convscale::search_result_to_csv(result);
  else
    std::cout << convscale::search_result_to_text(result);
  return 0;
}

int run_sweep(const std::string& spec_path, const std::string& config_path,
              const std::string& format) {
  const NetworkSpec base = load_spec(spec_path);
  std::vector<CompoundConfig> configs;
  std::vector<double> ratios{4.0};
  if (!config_path.empty()) {
    ordered_json config = ordered_json::parse(read_file(config_path));
    if (config.contains("ratios")) ratios = config.at("ratios").get<std::vector<double>>();
    if (config.contains("configs")) {
      for (const auto& c : config.at("configs")) {
        configs.push_back({c.value("alpha", 1.0), c.value("beta", 1.0),
                           c.value("gamma", 1.0), c.value("phi", 1.0)});
      }
    }
  }
  const auto rows = convscale::sweep_families(base, configs, ratios);
  if (format == "doc") {
    ordered_json j = ordered_json::array();
    for (const auto& row : rows) {
      j.push_back({{"method", row.method},
                   {"d", row.triple.d},
                   {"w", row.triple.w},
                   {"r", row.triple.r},
                   {"params", row.params},
                   {"flops", row.flops}});
    }
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << convscale::sweep_to_csv(rows);
  }
  return 0;
}

int run_verify(const std::string& spec_path, bool dump_trace) {
  const NetworkSpec spec = load_spec(spec_path);
  const CostReport report = convscale::profile(spec);
  const convscale::TensorShape input{spec.input_resolution, spec.input_resolution,
                                     spec.input_channels};
  const convscale::ExecutionTrace trace = convscale::execute(spec, input);
  if (dump_trace) std::cout << convscale::trace_to_text(trace);
  const convscale::ReconcileResult rr = convscale::reconcile(trace, report);
  std::cout << rr.detail << "\n";
  return rr.equal() ? 0 : 1;
}

int run_zoo_list() {
  for (const std::string& name : convscale::zoo_names()) std::cout << name << "\n";
  return 0;
}

// Published cost targets the family calibration and the table reproduction
// are checked against (params, flops).
struct FamilyTarget {
  const char* name;
  double params;
  double flops;
};
constexpr FamilyTarget kFamilyTargets[] = {
    {"efficientnet-b0", 5.3e6, 0.39e9},  {"efficientnet-b1", 7.8e6, 0.70e9},
    {"efficientnet-b2", 9.2e6, 1.0e9},   {"efficientnet-b3", 12e6, 1.8e9},
    {"efficientnet-b4", 19e6, 4.2e9},    {"efficientnet-b5", 30e6, 9.9e9},
    {"efficientnet-b6", 43e6, 19e9},     {"efficientnet-b7", 66e6, 37e9},
};

int run_reproduce_tables() {
  std::cout << "# family costs\n";
  std::cout << "model,params,flops\n";
  const convscale::FamilySpec family = convscale::efficientnet_family();
  for (const auto& variant : family.variants) {
    const CostReport report = convscale::profile(materialize(family, variant));
    std::cout << variant.name << ',' << report.total_params << ',' << report.total_flops
              << "\n";
  }

  std::cout << "\n# scaled baselines\n";
  std::cout << "model,method,d,w,r,flops\n";
  struct Row {
    const char* model;
    const char* method;
    convscale::ScaleTriple t;
  };
  const Row rows[] = {
      {"mobilenet-v1", "baseline", {1, 1, 1}},   {"mobilenet-v1", "width", {1, 2, 1}},
      {"mobilenet-v1", "resolution", {1, 1, 2}}, {"mobilenet-v1", "compound", {1.4, 1.2, 1.3}},
      {"mobilenet-v2", "baseline", {1, 1, 1}},   {"mobilenet-v2", "depth", {4, 1, 1}},
      {"mobilenet-v2", "width", {1, 2, 1}},      {"mobilenet-v2", "resolution", {1, 1, 2}},
      {"resnet-50", "baseline", {1, 1, 1}},      {"resnet-50", "depth", {4, 1, 1}},
      {"resnet-50", "width", {1, 2, 1}},         {"resnet-50", "resolution", {1, 1, 2}},
  };
  for (const Row& row : rows) {
    const NetworkSpec scaled =
        convscale::apply_scale(convscale::make_network(row.model), row.t);
    std::cout << row.model << ',' << row.method << ',' << row.t.d << ',' << row.t.w << ','
              << row.t.r << ',' << convscale::profile(scaled).total_flops << "\n";
  }

  std::cout << "\n# b0 scaling methods\n";
  std::cout << convscale::sweep_to_csv(
      convscale::sweep_families(convscale::efficientnet_b0(), {{1.4, 1.2, 1.3, 1.0}}, {4.0}));
  return 0;
}

int run_calibrate_family() {
  const NetworkSpec base = convscale::efficientnet_b0();
  constexpr double kAlpha = 1.2;
  constexpr double kBeta = 1.1;
  std::printf("// name            phi    input_resolution\n");
  for (int i = 1; i < 8; ++i) {
    const FamilyTarget& target = kFamilyTargets[i];
    double best_score = 1e18;
    double best_phi = 0.0;
    int best_res = 0;
    for (int phi_step = 0; phi_step <= 900; ++phi_step) {
      const double phi = phi_step * 0.01;
      const NetworkSpec scaled = convscale::apply_scale(
          base, {std::pow(kAlpha, phi), std::pow(kBeta, phi), 1.0});
      const CostReport params_probe = convscale::profile(scaled);
      const double pdev =
          (static_cast<double>(params_probe.total_params) - target.params) / target.params;
      if (std::abs(pdev) > 0.03) continue;
      NetworkSpec resized = scaled;
      const int r0 = static_cast<int>(base.input_resolution * std::pow(1.15, phi));
      for (int res = std::max(base.input_resolution, r0 - 80); res < r0 + 120; ++res) {
        resized.input_resolution = res;
        const double flops = static_cast<double>(convscale::profile(resized).total_flops);
        const double fdev = (flops - target.flops) / target.flops;
        if (std::abs(fdev) > 0.07) continue;
        const double score = std::max(std::abs(pdev) / 0.03, std::abs(fdev) / 0.07);
        if (score < best_score) {
          best_score = score;
          best_phi = phi;
          best_res = res;
        }
      }
    }
    if (best_res == 0) {
      std::printf("// %s: no feasible (phi, resolution) found\n", target.name);
    } else {
      std::printf("{\"%s\", %.2f, %d},\n", target.name, best_phi, best_res);
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ConvNet architecture IR, compound scaling and static cost analysis"};
  app.require_subcommand(1);

  std::string model, spec_path, config_path, out_path, format = "text";
  std::string evaluator_name, depth_rounding = "ceiling";
  std::optional<double> d, w, r, alpha, beta, gamma, phi;
  bool serial = false;
  bool dump_trace = false;

  auto* generate = app.add_subcommand("generate", "emit a built-in network spec");
  generate->add_option("model", model, "network name (see `zoo list`)")->required();
  generate->add_option("-o,--out", out_path, "output path (default: stdout)");

  auto* scale = app.add_subcommand("scale", "apply a scaling transform to a spec");
  scale->add_option("spec", spec_path)->required();
  scale->add_option("--d", d, "depth multiplier");
  scale->add_option("--w", w, "width multiplier");
  scale->add_option("--r", r, "resolution multiplier");
  scale->add_option("--alpha", alpha);
  scale->add_option("--beta", beta);
  scale->add_option("--gamma", gamma);
  scale->add_option("--phi", phi);
  scale->add_option("--depth-rounding", depth_rounding, "ceiling|nearest")
      ->check(CLI::IsMember({"ceiling", "nearest"}));
  scale->add_option("-o,--out", out_path);

  auto* profile = app.add_subcommand("profile", "static parameter/FLOPS/memory report");
  profile->add_option("spec", spec_path)->required();
  profile->add_option("--format", format, "text|csv|doc")
      ->check(CLI::IsMember({"text", "csv", "doc"}));

  auto* search = app.add_subcommand("search", "grid search over (alpha, beta, gamma)");
  search->add_option("config", config_path, "search config document")->required();
  search->add_option("--evaluator", evaluator_name,
                     "constant|neg-flops|flops-objective|synthetic-peak");
  search->add_flag("--serial", serial, "single-threaded candidate evaluation");
  search->add_option("--format", format, "text|csv");

  auto* sweep = app.add_subcommand("sweep", "single-dimension vs compound scaling table");
  sweep->add_option("spec", spec_path)->required();
  sweep->add_option("config", config_path, "ratios/configs document (optional)");
  sweep->add_option("--format", format, "csv|doc");

  auto* verify = app.add_subcommand("verify", "reconcile analyzer against the interpreter");
  verify->add_option("spec", spec_path)->required();
  verify->add_flag("--dump-trace", dump_trace, "print the execution trace first");

  auto* zoo = app.add_subcommand("zoo", "model zoo");
  zoo->require_subcommand(1);
  auto* zoo_list = zoo->add_subcommand("list", "list built-in network names");

  auto* tables = app.add_subcommand("reproduce-tables", "family and scaled-baseline costs");
  auto* calibrate = app.add_subcommand("calibrate-family",
                                       "re-derive the family scaling constants");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 2;
  }

  try {
    if (generate->parsed()) return run_generate(model, out_path);
    if (scale->parsed())
      return run_scale(spec_path, d, w, r, alpha, beta, gamma, phi, depth_rounding, out_path);
    if (profile->parsed()) return run_profile(spec_path, format);
    if (search->parsed()) return run_search(config_path, evaluator_name, serial, format);
    if (sweep->parsed()) return run_sweep(spec_path, config_path, format);
    if (verify->parsed()) return run_verify(spec_path, dump_trace);
    if (zoo->parsed() && zoo_list->parsed()) return run_zoo_list();
    if (tables->parsed()) return run_reproduce_tables();
    if (calibrate->parsed()) return run_calibrate_family();
    std::cerr << "no subcommand\n";
    return 2;
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const convscale::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const convscale::ValidationError& e) {
    std::cerr << e.what() << "\n";
    for (const auto& v : e.violations())
      std::cerr << "  stage " << v.stage_index << ": " << v.message << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
}
