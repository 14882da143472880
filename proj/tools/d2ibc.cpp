#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "d2ibc/d2ibc.hpp"

namespace {

std::string keys_for(const std::string& command) {
  std::string out = "Config keys read:\n";
  for (const auto& k : d2ibc::config_keys()) {
    const std::string cmds = std::string(",") + k.commands + ",";
    if (cmds.find("," + command + ",") == std::string::npos) continue;
    std::string name = k.section[0] ? std::string("[") + k.section + "] " + k.key : k.key;
    out += "  " + name + " (" + k.type + ", default " + k.fallback + "): " + k.doc + "\n";
  }
  return out;
}

struct Options {
  std::string config;
  std::optional<std::string> out, data, model, pid, trace;
  std::optional<std::uint64_t> seed;
  std::optional<double> ridge;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data-driven inversion-based control: identify, tune, simulate and certify."};
  app.require_subcommand(1);
  Options o;

  auto add = [&](const std::string& name, const std::string& desc) {
    auto* sub = app.add_subcommand(name, desc);
    sub->footer(keys_for(name));
    sub->add_option("--config", o.config, "TOML run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output path (overrides the config)");
    sub->add_option("--seed", o.seed, "override the global seed");
    return sub;
  };
  auto* collect = add("collect", "Collect an open-loop dataset from a registry plant");
  auto* identify = add("identify", "Fit a polynomial model to a dataset");
  identify->add_option("--data", o.data, "dataset CSV");
  identify->add_option("--ridge", o.ridge, "override [model] ridge");
  auto* tune = add("tune", "Tune the linear controller by virtual reference");
  tune->add_option("--data", o.data, "dataset CSV");
  tune->add_option("--model", o.model, "model JSON");
  auto* simulate = add("simulate", "Run the closed loop");
  simulate->add_option("--model", o.model, "model JSON");
  simulate->add_option("--pid", o.pid, "PID JSON");
  auto* certify = add("certify", "Compute the stability certificate");
  certify->add_option("--model", o.model, "model JSON");
  certify->add_option("--pid", o.pid, "PID JSON");
  certify->add_option("--trace", o.trace, "trace CSV to check against the bound");

  CLI11_PARSE(app, argc, argv);

  try {
    d2ibc::RunConfig cfg = d2ibc::load_config(o.config);
    if (o.seed) cfg.seed = *o.seed;
    if (o.ridge) cfg.model_ridge = *o.ridge;
    const std::string data = o.data.value_or(cfg.dataset_path);
    const std::string model = o.model.value_or(cfg.model_path);
    const std::string pid = o.pid.value_or(cfg.pid_path);

    if (collect->parsed()) return d2ibc::cmd_collect(cfg, o.out.value_or(cfg.dataset_path));
    if (identify->parsed()) return d2ibc::cmd_identify(cfg, data, o.out.value_or(cfg.model_path));
    if (tune->parsed()) return d2ibc::cmd_tune(cfg, data, model, o.out.value_or(cfg.pid_path));
    if (simulate->parsed()) return d2ibc::cmd_simulate(cfg, model, pid, o.out.value_or(cfg.trace_path));
    if (certify->parsed()) {
      std::optional<std::string> trace = o.trace;
      if (!trace && cfg.check_trace) trace = cfg.trace_path;
      return d2ibc::cmd_certify(cfg, model, pid, trace, o.out.value_or(cfg.certificate_path));
    }
  } catch (const d2ibc::Error& e) {
    std::cerr << "error [" << d2ibc::to_string(e.code()) << "]: " << e.what() << "\n";
    return d2ibc::exit_status_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return d2ibc::kExitError;
  }
  return d2ibc::kExitError;
}
