#pragma once

// Run configuration: one TOML file shared by every subcommand.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <toml.hpp>

#include "d2ibc/dataset.hpp"
#include "d2ibc/simloop.hpp"
#include "d2ibc/tuning.hpp"

namespace d2ibc {

struct ConfigKey {
  const char* section;  // "" for top level
  const char* key;
  const char* type;
  const char* fallback;
  const char* commands;  // subcommands that read the key
  const char* doc;
};

inline const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"", "seed", "int", "0", "collect,tune,simulate,certify", "global seed; sub-seeds are derived by label"},
      {"plant", "name", "string", "\"model-plus-residue\"", "collect,identify,simulate,certify",
       "registry plant: scalar-linear, mimo-poly, model-plus-residue"},
      {"plant", "u_bar", "float", "1.0", "collect,identify,simulate,certify", "input saturation bound"},
      {"plant", "xi_bar", "float", "0.0", "collect,simulate,certify", "disturbance bound of the plant"},
      {"plant", "a", "float", "0.5", "collect,identify,simulate,certify", "model-plus-residue: base pole"},
      {"plant", "b", "float", "1.0", "collect,identify,simulate,certify", "model-plus-residue: base input gain"},
      {"plant", "c_y", "float", "0.2", "collect,identify,simulate,certify", "model-plus-residue: residue slope"},
      {"plant", "c_0", "float", "0.0", "collect,identify,simulate,certify", "model-plus-residue: residue offset"},
      {"plant", "c_xi", "float", "1.0", "collect,identify,simulate,certify", "model-plus-residue: disturbance gain"},
      {"dataset", "path", "string", "\"data.csv\"", "collect,identify,tune,simulate,certify", "dataset CSV"},
      {"dataset", "kind", "string", "\"multilevel\"", "collect", "excitation: multilevel or multisine"},
      {"dataset", "amplitude", "float", "1.0", "collect", "excitation amplitude (<= u_bar)"},
      {"dataset", "length", "int", "200", "collect", "number of records"},
      {"dataset", "hold", "int", "5", "collect", "samples per level (multilevel)"},
      {"dataset", "n_sines", "int", "8", "collect", "number of sines (multisine)"},
      {"dataset", "noise", "bool", "false", "collect", "apply seeded disturbance within plant xi_bar"},
      {"model", "path", "string", "\"model.json\"", "identify,tune,simulate,certify", "model JSON"},
      {"model", "n", "int", "plant order", "identify", "model order"},
      {"model", "degree", "int", "1", "identify", "polynomial degree"},
      {"model", "ridge", "float", "0.0", "identify", "ridge weight (0 = plain least squares)"},
      {"model", "use_plant_base", "bool", "false", "identify",
       "export the base model of a model-plus-residue plant instead of fitting"},
      {"inversion", "zeta", "float array", "all 1", "tune,simulate,certify", "tracking priorities, one per output"},
      {"inversion", "mu", "float array", "all 0", "tune,simulate,certify", "magnitude penalties, one per input"},
      {"inversion", "lambda", "float array", "all 0", "tune,simulate,certify", "rate penalties, one per input"},
      {"inversion", "normalize", "bool", "false", "tune,simulate,certify",
       "divide weights by dataset mean squares (else unit constants)"},
      {"inversion", "grid_points", "int", "33", "tune,simulate,certify", "grid points per input (odd)"},
      {"inversion", "refine_iters", "int", "60", "tune,simulate,certify", "golden-section sweeps"},
      {"inversion", "tol_u", "float", "1e-8", "tune,simulate,certify", "refinement tolerance"},
      {"inversion", "budget", "float", "1e6", "tune,simulate,certify", "max grid evaluations"},
      {"pid", "path", "string", "\"pid.json\"", "tune,simulate,certify", "PID gains JSON"},
      {"pid", "n_theta", "int", "1", "tune", "PID order (1 = PI, 2 = PID)"},
      {"pid", "mode", "string", "\"replay\"", "tune", "linear input signal: replay or raw"},
      {"reference_model", "poles", "float array", "all 0.5", "tune", "first-order reference model poles"},
      {"sim", "T", "int", "200", "simulate", "horizon"},
      {"sim", "reference", "string", "\"step\"", "simulate", "reference: step, sinusoid or table"},
      {"sim", "amplitude", "float array", "[0.5]", "simulate", "step/sinusoid amplitude per output"},
      {"sim", "period", "int", "50", "simulate", "sinusoid period"},
      {"sim", "table", "array of [t, r1, ...]", "[]", "simulate", "piecewise-constant reference"},
      {"sim", "r_bar", "float", "1.0", "simulate,certify", "reference bound"},
      {"sim", "xi_bar", "float", "0.0", "simulate,certify", "disturbance bound for the run"},
      {"sim", "y0", "float array", "zeros", "simulate", "initial output (held over the window)"},
      {"sim", "abort_bound", "float", "1000.0", "simulate", "divergence threshold on |y|"},
      {"sim", "trace", "string", "\"trace.csv\"", "simulate,certify", "trace CSV"},
      {"sim", "summary", "string", "\"summary.json\"", "simulate", "summary JSON"},
      {"stability", "y_bar", "float", "dataset y_bar", "certify", "output box bound"},
      {"stability", "r_bar", "float", "sim.r_bar", "certify", "reference box bound"},
      {"stability", "xi_bar", "float", "sim.xi_bar", "certify", "disturbance box bound"},
      {"stability", "safety_factor", "float", "1.2", "certify", "inflation of sampled gains"},
      {"stability", "lipschitz_grid", "int", "33", "certify", "grid points per dimension"},
      {"stability", "xi_grid", "int", "9", "certify", "grid points per dimension for the disturbance gain"},
      {"stability", "lp_samples", "int", "2000", "certify", "random operating points for the error bound fit"},
      {"stability", "ulin_bar", "float", "u_bar", "certify", "bound on past linear commands when sampling"},
      {"stability", "check_trace", "bool", "false", "certify", "verify the bound on sim.trace"},
      {"stability", "certificate", "string", "\"certificate.json\"", "certify", "certificate JSON"},
  };
  return keys;
}

struct RunConfig {
  std::uint64_t seed = 0;

  std::string plant_name = "model-plus-residue";
  std::map<std::string, double> plant_params;

  std::string dataset_path = "data.csv";
  ExcitationSpec excitation;
  bool dataset_noise = false;

  std::string model_path = "model.json";
  std::optional<int> model_n;
  int model_degree = 1;
  double model_ridge = 0.0;
  bool use_plant_base = false;

  std::optional<std::vector<double>> zeta, mu, lambda;
  bool normalize = false;
  int grid_points = 33;
  int refine_iters = 60;
  double tol_u = 1e-8;
  double budget = 1e6;

  std::string pid_path = "pid.json";
  int n_theta = 1;
  LinearInputMode pid_mode = LinearInputMode::Replay;

  std::optional<std::vector<double>> poles;

  int T = 200;
  ReferenceKind reference = ReferenceKind::Step;
  std::vector<double> amplitude{0.5};
  int period = 50;
  std::vector<std::vector<double>> table;
  double r_bar = 1.0;
  double xi_bar = 0.0;
  std::optional<std::vector<double>> y0;
  double abort_bound = 1e3;
  std::string trace_path = "trace.csv";
  std::string summary_path = "summary.json";

  std::optional<double> stab_y_bar, stab_r_bar, stab_xi_bar;
  double safety_factor = 1.2;
  int lipschitz_grid = 33;
  int xi_grid = 9;
  int lp_samples = 2000;
  double ulin_bar = -1.0;
  bool check_trace = false;
  std::string certificate_path = "certificate.json";

  PlantSpec plant() const { return registry_plant(plant_name, plant_params); }

  InversionConfig inversion(int n_y, int n_u, const DataSet* d = nullptr) const {
    auto vec = [](const std::optional<std::vector<double>>& v, int n, double fill) {
      if (!v) return Vector::Constant(n, fill).eval();
      return Eigen::Map<const Vector>(v->data(), static_cast<Eigen::Index>(v->size())).eval();
    };
    InversionConfig c{vec(zeta, n_y, 1.0), vec(mu, n_u, 0.0), vec(lambda, n_u, 0.0), NormConstants::unit(n_y, n_u)};
    if (normalize) {
      require(d != nullptr, ErrorCode::Config, "inversion.normalize needs the dataset");
      c.norm = compute_norm_constants(*d);
    }
    c.grid_points = grid_points;
    c.refine_iters = refine_iters;
    c.tol_u = tol_u;
    c.budget = budget;
    c.validate(n_y, n_u);
    return c;
  }

  ReferenceModel reference_model(int n_y) const {
    ReferenceModel M;
    M.poles = poles ? Eigen::Map<const Vector>(poles->data(), static_cast<Eigen::Index>(poles->size())).eval()
                    : Vector::Constant(n_y, 0.5).eval();
    M.validate();
    return M;
  }

  SimConfig sim(int n_y) const {
    SimConfig s;
    s.T = T;
    s.r_bar = r_bar;
    s.xi_bar = xi_bar;
    s.seed = derive_seed(seed, "disturbance");
    s.abort_bound = abort_bound;
    s.y0_window = Matrix::Zero(1, n_y);
    if (y0)
      for (int i = 0; i < n_y; ++i) s.y0_window(0, i) = (*y0)[i];
    s.reference.kind = reference;
    s.reference.amplitude = Eigen::Map<const Vector>(amplitude.data(), static_cast<Eigen::Index>(amplitude.size()));
    s.reference.period = period;
    for (const auto& row : table)
      s.reference.table.emplace_back(static_cast<int>(row[0]),
                                     Eigen::Map<const Vector>(row.data() + 1, static_cast<Eigen::Index>(row.size() - 1)));
    return s;
  }

  /// Cross-section consistency, checked before any subcommand runs.
  void validate() const {
    const PlantSpec p = plant();
    const int ny = p.n_y, nu = p.n_u;
    auto len = [](const std::optional<std::vector<double>>& v, int n, const char* what) {
      require(!v || static_cast<int>(v->size()) == n, ErrorCode::Config,
              std::string(what) + " needs " + std::to_string(n) + " entries");
    };
    len(zeta, ny, "inversion.zeta");
    len(mu, nu, "inversion.mu");
    len(lambda, nu, "inversion.lambda");
    len(poles, ny, "reference_model.poles");
    len(y0, ny, "sim.y0");
    require(amplitude.size() == 1 || static_cast<int>(amplitude.size()) == ny, ErrorCode::Config,
            "sim.amplitude needs 1 or n_y entries");
    for (const auto& row : table)
      require(static_cast<int>(row.size()) == ny + 1, ErrorCode::Config, "sim.table rows are [t, r1..r_ny]");
    require(excitation.amplitude <= p.u_bar, ErrorCode::Bound,
            "dataset.amplitude " + detail::format_double(excitation.amplitude) + " exceeds u_bar=" +
                detail::format_double(p.u_bar));
    require(xi_bar >= 0.0 && xi_bar <= p.xi_bar, ErrorCode::Config, "sim.xi_bar must lie in [0, plant.xi_bar]");
    require(r_bar >= 0.0, ErrorCode::Config, "sim.r_bar must be non-negative");
    require(T >= 1 && period >= 1, ErrorCode::Config, "sim.T and sim.period must be positive");
    require(model_degree >= 0 && model_ridge >= 0.0, ErrorCode::Config, "model.degree and model.ridge must be >= 0");
    require(!model_n || *model_n >= 1, ErrorCode::Config, "model.n must be >= 1");
    require(n_theta >= 0, ErrorCode::Config, "pid.n_theta must be >= 0");
    require(safety_factor >= 1.0, ErrorCode::Config, "stability.safety_factor must be >= 1");
    require(lipschitz_grid >= 2 && xi_grid >= 2 && lp_samples >= 0, ErrorCode::Config,
            "stability grids need >= 2 points and lp_samples >= 0");
    if (stab_y_bar && stab_r_bar)
      require(*stab_r_bar <= *stab_y_bar, ErrorCode::Config, "stability.r_bar must not exceed stability.y_bar");
    if (poles) reference_model(ny);
    if (use_plant_base) require(p.kind() == PlantKind::ModelPlusResidue, ErrorCode::Config,
                                "model.use_plant_base needs a model-plus-residue plant");
  }
};

namespace detail {

inline std::string resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return (path.is_absolute() ? path : base / path).lexically_normal().string();
}

class TomlReader {
 public:
  TomlReader(const toml::table& t, std::string section) : t_(t), section_(std::move(section)) {}

  const toml::node* get(const char* key) const { return t_.get(key); }

  [[noreturn]] void fail(const char* key, const char* want) const {
    throw Error(ErrorCode::Config, name(key) + " must be " + want);
  }

  void read(const char* key, double& out) const {
    if (auto* n = get(key)) {
      auto v = n->value<double>();
      if (!v) fail(key, "a number");
      out = *v;
    }
  }
  void read(const char* key, std::optional<double>& out) const {
    if (get(key)) {
      double v = 0.0;
      read(key, v);
      out = v;
    }
  }
  void read(const char* key, int& out) const {
    if (auto* n = get(key)) {
      if (!n->is_integer()) fail(key, "an integer");
      out = static_cast<int>(n->as_integer()->get());
    }
  }
  void read(const char* key, std::optional<int>& out) const {
    if (get(key)) {
      int v = 0;
      read(key, v);
      out = v;
    }
  }
  void read(const char* key, bool& out) const {
    if (auto* n = get(key)) {
      if (!n->is_boolean()) fail(key, "a boolean");
      out = n->as_boolean()->get();
    }
  }
  void read(const char* key, std::string& out) const {
    if (auto* n = get(key)) {
      if (!n->is_string()) fail(key, "a string");
      out = n->as_string()->get();
    }
  }
  void read(const char* key, std::vector<double>& out) const {
    if (auto* n = get(key)) out = numbers(key, *n);
  }
  void read(const char* key, std::optional<std::vector<double>>& out) const {
    if (auto* n = get(key)) out = numbers(key, *n);
  }
  void read(const char* key, std::vector<std::vector<double>>& out) const {
    if (auto* n = get(key)) {
      const auto* arr = n->as_array();
      if (!arr) fail(key, "an array of arrays");
      out.clear();
      for (const auto& row : *arr) out.push_back(numbers(key, row));
    }
  }

 private:
  std::string name(const char* key) const { return section_.empty() ? key : section_ + "." + key; }

  std::vector<double> numbers(const char* key, const toml::node& n) const {
    std::vector<double> v;
    if (auto x = n.value<double>()) return {*x};
    const auto* arr = n.as_array();
    if (!arr) fail(key, "a number or an array of numbers");
    for (const auto& e : *arr) {
      auto x = e.value<double>();
      if (!x) fail(key, "an array of numbers");
      v.push_back(*x);
    }
    return v;
  }

  const toml::table& t_;
  std::string section_;
};

}  // namespace detail

/// Parses TOML text; relative paths are resolved against `base_dir`.
inline RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = ".",
                              const std::string& origin = "<config>") {
  toml::table root;
  try {
    root = toml::parse(text, origin);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << origin << ":" << e.source().begin.line << ": " << e.description();
    throw Error(ErrorCode::Config, msg.str());
  }

  const auto& keys = config_keys();
  auto known = [&](std::string_view section, std::string_view key) {
    return std::any_of(keys.begin(), keys.end(),
                       [&](const ConfigKey& k) { return section == k.section && key == k.key; });
  };
  auto known_section = [&](std::string_view section) {
    return std::any_of(keys.begin(), keys.end(), [&](const ConfigKey& k) { return section == k.section; });
  };
  for (const auto& [k, node] : root) {
    if (node.is_table()) {
      require(known_section(k.str()) && !k.str().empty(), ErrorCode::Config,
              "unknown section [" + std::string(k.str()) + "]");
      for (const auto& [kk, _] : *node.as_table())
        require(known(k.str(), kk.str()), ErrorCode::Config,
                "unknown key '" + std::string(kk.str()) + "' in [" + std::string(k.str()) + "]");
    } else {
      require(known("", k.str()), ErrorCode::Config, "unknown top-level key '" + std::string(k.str()) + "'");
    }
  }

  RunConfig c;
  static const toml::table empty;
  auto section = [&](const char* name) {
    const toml::table* t = root.get_as<toml::table>(name);
    return detail::TomlReader(t ? *t : empty, name);
  };

  {
    if (const auto* n = root.get("seed")) {
      require(n->is_integer() && n->as_integer()->get() >= 0, ErrorCode::Config, "seed must be a non-negative integer");
      c.seed = static_cast<std::uint64_t>(n->as_integer()->get());
    }
  }
  {
    auto s = section("plant");
    s.read("name", c.plant_name);
    for (const char* k : {"u_bar", "xi_bar", "a", "b", "c_y", "c_0", "c_xi"}) {
      std::optional<double> v;
      s.read(k, v);
      if (v) c.plant_params[k] = *v;
    }
  }
  {
    auto s = section("dataset");
    s.read("path", c.dataset_path);
    std::string kind = "multilevel";
    s.read("kind", kind);
    require(kind == "multilevel" || kind == "multisine", ErrorCode::Config,
            "dataset.kind must be multilevel or multisine");
    c.excitation.kind = kind == "multilevel" ? ExcitationKind::MultilevelRandom : ExcitationKind::Multisine;
    s.read("amplitude", c.excitation.amplitude);
    s.read("length", c.excitation.length);
    s.read("hold", c.excitation.hold);
    s.read("n_sines", c.excitation.n_sines);
    s.read("noise", c.dataset_noise);
  }
  {
    auto s = section("model");
    s.read("path", c.model_path);
    s.read("n", c.model_n);
    s.read("degree", c.model_degree);
    s.read("ridge", c.model_ridge);
    s.read("use_plant_base", c.use_plant_base);
  }
  {
    auto s = section("inversion");
    s.read("zeta", c.zeta);
    s.read("mu", c.mu);
    s.read("lambda", c.lambda);
    s.read("normalize", c.normalize);
    s.read("grid_points", c.grid_points);
    s.read("refine_iters", c.refine_iters);
    s.read("tol_u", c.tol_u);
    s.read("budget", c.budget);
  }
  {
    auto s = section("pid");
    s.read("path", c.pid_path);
    s.read("n_theta", c.n_theta);
    std::string mode = "replay";
    s.read("mode", mode);
    require(mode == "replay" || mode == "raw", ErrorCode::Config, "pid.mode must be replay or raw");
    c.pid_mode = mode == "replay" ? LinearInputMode::Replay : LinearInputMode::Raw;
  }
  section("reference_model").read("poles", c.poles);
  {
    auto s = section("sim");
    s.read("T", c.T);
    std::string ref = "step";
    s.read("reference", ref);
    if (ref == "step") c.reference = ReferenceKind::Step;
    else if (ref == "sinusoid") c.reference = ReferenceKind::Sinusoid;
    else if (ref == "table") c.reference = ReferenceKind::Table;
    else throw Error(ErrorCode::Config, "sim.reference must be step, sinusoid or table");
    s.read("amplitude", c.amplitude);
    s.read("period", c.period);
    s.read("table", c.table);
    s.read("r_bar", c.r_bar);
    s.read("xi_bar", c.xi_bar);
    s.read("y0", c.y0);
    s.read("abort_bound", c.abort_bound);
    s.read("trace", c.trace_path);
    s.read("summary", c.summary_path);
  }
  {
    auto s = section("stability");
    s.read("y_bar", c.stab_y_bar);
    s.read("r_bar", c.stab_r_bar);
    s.read("xi_bar", c.stab_xi_bar);
    s.read("safety_factor", c.safety_factor);
    s.read("lipschitz_grid", c.lipschitz_grid);
    s.read("xi_grid", c.xi_grid);
    s.read("lp_samples", c.lp_samples);
    s.read("ulin_bar", c.ulin_bar);
    s.read("check_trace", c.check_trace);
    s.read("certificate", c.certificate_path);
  }

  for (std::string* p : {&c.dataset_path, &c.model_path, &c.pid_path, &c.trace_path, &c.summary_path,
                         &c.certificate_path})
    *p = detail::resolve(base_dir, *p);
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  require(f.good(), ErrorCode::Config, "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), std::filesystem::path(path).parent_path(), path);
}

}  // namespace d2ibc
