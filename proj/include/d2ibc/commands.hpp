#pragma once

// Subcommands of the d2ibc tool. Each returns a process exit status.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "d2ibc/config.hpp"
#include "d2ibc/stability.hpp"

namespace d2ibc {

enum ExitStatus : int {
  kExitOk = 0,
  kExitError = 1,
  kExitDivergence = 2,
  kExitAssumptions = 3,
  kExitBoundViolated = 4,
};

inline int exit_status_for(ErrorCode code) {
  return code == ErrorCode::PlantDivergence ? kExitDivergence : kExitError;
}

namespace detail {

inline void write_file(const std::string& path, const std::string& content) {
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  std::error_code ec;
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
  std::ofstream f(path, std::ios::binary);
  require(f.good(), ErrorCode::Config, "cannot write '" + path + "'");
  f << content;
  require(f.good(), ErrorCode::Config, "write failed for '" + path + "'");
}

inline nlohmann::json read_json(const std::string& path) {
  std::ifstream f(path);
  require(f.good(), ErrorCode::Config, "cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, path + ": " + e.what());
  }
}

inline std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

inline PolyModel load_model(const std::string& path) { return model_from_json(read_json(path)); }
inline PidGains load_pid(const std::string& path) { return pid_from_json(read_json(path)); }

}  // namespace detail

inline int cmd_collect(const RunConfig& cfg, const std::string& out, std::ostream& msg = std::cout) {
  cfg.validate();
  const PlantSpec p = cfg.plant();
  ExcitationSpec e = cfg.excitation;
  e.seed = derive_seed(cfg.seed, "excitation");
  std::optional<std::uint64_t> noise;
  if (cfg.dataset_noise) noise = derive_seed(cfg.seed, "collect_noise");
  const DataSet d = collect_open_loop(p, e, noise);
  detail::write_file(out, to_csv(d));
  msg << "wrote " << d.L() << " records to " << out << " (y_bar=" << detail::format_double(d.y_bar()) << ")\n";
  return kExitOk;
}

inline int cmd_identify(const RunConfig& cfg, const std::string& data, const std::string& out,
                        std::ostream& msg = std::cout) {
  cfg.validate();
  const PlantSpec p = cfg.plant();
  PolyModel f;
  if (cfg.use_plant_base) {
    f = std::get<ModelPlusResidue>(p.dynamics).base;
    msg << "exported plant base model (order " << f.n << ")\n";
  } else {
    const DataSet d = load_csv(data);
    const int n = cfg.model_n.value_or(d.order_hint().value_or(p.n));
    const ModelFit fit = fit_model(d, n, cfg.model_degree, cfg.model_ridge);
    f = fit.model;
    for (Eigen::Index i = 0; i < fit.rms_residual.size(); ++i)
      msg << "rms_residual[y" << i + 1 << "] = " << detail::format_double(fit.rms_residual[i]) << "\n";
    msg << "regressor_condition = " << detail::format_double(fit.regressor_condition) << "\n";
  }
  detail::write_file(out, detail::dump(to_json(f)));
  return kExitOk;
}

inline int cmd_tune(const RunConfig& cfg, const std::string& data, const std::string& model, const std::string& out,
                    std::ostream& msg = std::cout) {
  cfg.validate();
  const DataSet d = load_csv(data);
  const ReferenceModel M = cfg.reference_model(d.n_y());
  LinearInputData lin;
  if (cfg.pid_mode == LinearInputMode::Replay) {
    const PolyModel f = detail::load_model(model);
    const InversionConfig inv = cfg.inversion(f.n_y, f.n_u, &d);
    lin = linear_input_data(d, LinearInputMode::Replay, M, &f, &inv);
  } else {
    lin = linear_input_data(d, LinearInputMode::Raw, M);
  }
  const VrftResult res = vrft_fit(M, lin.u_lin, lin.y, cfg.n_theta);
  nlohmann::json j = to_json(res.gains);
  j["j_vr"] = res.j_vr;
  j["rows"] = res.rows;
  detail::write_file(out, detail::dump(j));
  msg << "J_VR = " << detail::format_double(res.j_vr) << " over " << res.rows << " rows\n";
  return kExitOk;
}

inline nlohmann::json trace_summary(const SimulationTrace& tr, double u_bar) {
  return {{"T", tr.T()},
          {"e_inf", tr.e_inf()},
          {"y_inf", tr.y_inf()},
          {"saturation_count", tr.saturation_count(u_bar)}};
}

inline int cmd_simulate(const RunConfig& cfg, const std::string& model, const std::string& pid,
                        const std::string& out_trace, std::ostream& msg = std::cout) {
  cfg.validate();
  const PlantSpec p = cfg.plant();
  const PolyModel f = detail::load_model(model);
  const PidGains g = detail::load_pid(pid);
  std::optional<DataSet> d;
  if (cfg.normalize) d = load_csv(cfg.dataset_path);
  const InversionConfig inv = cfg.inversion(f.n_y, f.n_u, d ? &*d : nullptr);
  try {
    const SimulationTrace tr = run_closed_loop(p, f, inv, g, cfg.sim(p.n_y));
    detail::write_file(out_trace, trace_to_csv(tr));
    nlohmann::json s = trace_summary(tr, p.u_bar);
    s["diverged"] = false;
    detail::write_file(cfg.summary_path, detail::dump(s));
    msg << "e_inf = " << detail::format_double(tr.e_inf()) << ", y_inf = " << detail::format_double(tr.y_inf())
        << "\n";
    return kExitOk;
  } catch (const DivergenceError& err) {
    detail::write_file(out_trace, trace_to_csv(err.partial()));
    nlohmann::json s = trace_summary(err.partial(), p.u_bar);
    s["diverged"] = true;
    detail::write_file(cfg.summary_path, detail::dump(s));
    msg << "diverged: " << err.what() << " (partial trace written)\n";
    return kExitDivergence;
  }
}

inline int cmd_certify(const RunConfig& cfg, const std::string& model, const std::string& pid,
                       const std::optional<std::string>& trace, const std::string& out,
                       std::ostream& msg = std::cout) {
  cfg.validate();
  const PlantSpec p = cfg.plant();
  const PolyModel f = detail::load_model(model);
  const PidGains g = detail::load_pid(pid);
  std::optional<DataSet> d;
  if (cfg.normalize || !cfg.stab_y_bar) d = load_csv(cfg.dataset_path);
  const InversionConfig inv = cfg.inversion(f.n_y, f.n_u, d ? &*d : nullptr);
  const double y_bar = cfg.stab_y_bar ? *cfg.stab_y_bar : d->y_bar();
  const double r_bar = cfg.stab_r_bar.value_or(cfg.r_bar);
  const double xi_bar = cfg.stab_xi_bar.value_or(cfg.xi_bar);

  std::optional<SimulationTrace> tr;
  if (trace) {
    std::ifstream in(*trace);
    require(in.good(), ErrorCode::Config, "cannot open trace '" + *trace + "'");
    tr = trace_from_csv(in, p.n);
  }
  CertifyOptions opt;
  opt.safety_factor = cfg.safety_factor;
  opt.lipschitz_grid = cfg.lipschitz_grid;
  opt.xi_grid = cfg.xi_grid;
  opt.lp_samples = cfg.lp_samples;
  opt.ulin_bar = cfg.ulin_bar;
  opt.seed = derive_seed(cfg.seed, "certify");
  StabilityCertificate cert = certify(p, f, inv, g, y_bar, r_bar, xi_bar, opt, tr ? &*tr : nullptr);
  if (cert.bound_check && trace) cert.bound_check->trace_id = std::filesystem::path(*trace).filename().string();
  detail::write_file(out, detail::dump(to_json(cert)));

  const auto& c = cert.constants;
  msg << "gamma_y=" << detail::format_double(c.gamma_y) << " Gamma_y=" << detail::format_double(c.Gamma_y)
      << " e_bar=" << detail::format_double(c.e_bar) << "\n";
  if (!cert.report.verdict) {
    msg << "assumptions fail:" << (cert.report.a2 ? "" : " model-accuracy") << (cert.report.a3 ? "" : " inversion")
        << (cert.report.a4 ? "" : " domain") << "\n";
    return kExitAssumptions;
  }
  if (cert.bound_check && !cert.bound_check->satisfied) {
    msg << "tracking bound violated: max |e| = " << detail::format_double(cert.bound_check->max_error) << " > "
        << detail::format_double(cert.bound_check->e_bar) << "\n";
    return kExitBoundViolated;
  }
  msg << "certified\n";
  return kExitOk;
}

}  // namespace d2ibc
