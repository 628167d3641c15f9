#include "hpinn/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace hpinn {

using nlohmann::json;

SweepConfig::SweepConfig() : nu{1e-4 / std::numbers::pi, 0.0} {}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::uint64_t cell_seed(std::uint64_t base, int q, double dt, double nu) {
  // splitmix64 over the bit patterns
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t h = mix(base);
  h = mix(h ^ static_cast<std::uint64_t>(q));
  h = mix(h ^ std::bit_cast<std::uint64_t>(dt));
  h = mix(h ^ std::bit_cast<std::uint64_t>(nu));
  return h;
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  bool has(const char* key) const { return node_.contains(key); }

  Reader child(const char* key) const {
    static const json empty = json::object();
    return Reader(has(key) ? node_.at(key) : empty, join(key));
  }

  template <class T>
  void read(const char* key, T& out) const {
    if (!has(key)) return;
    const json& v = node_.at(key);
    const std::string where = join(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) fail(where, "expected a boolean");
      out = v.get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) fail(where, "expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_unsigned()) {
          out = v.get<T>();
        } else {
          const auto s = v.get<long long>();
          if (s < 0) fail(where, "must be non-negative");
          out = static_cast<T>(s);
        }
      } else {
        const auto s = v.get<long long>();
        if (s < std::numeric_limits<T>::min() || s > std::numeric_limits<T>::max()) {
          fail(where, "out of range");
        }
        out = static_cast<T>(s);
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) fail(where, "expected a number");
      out = v.get<double>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) fail(where, "expected a string");
      out = v.get<std::string>();
    } else {
      static_assert(sizeof(T) == 0, "unsupported field type");
    }
  }

  template <class T>
  void read_list(const char* key, std::vector<T>& out) const {
    if (!has(key)) return;
    const json& v = node_.at(key);
    const std::string where = join(key);
    if (!v.is_array()) fail(where, "expected an array");
    std::vector<T> values;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const json& e = v[i];
      const std::string at = where + "[" + std::to_string(i) + "]";
      if constexpr (std::is_integral_v<T>) {
        if (!e.is_number_integer()) fail(at, "expected an integer");
        values.push_back(e.get<T>());
      } else {
        if (!e.is_number()) fail(at, "expected a number");
        values.push_back(e.get<T>());
      }
    }
    out = std::move(values);
  }

  void read_pair(const char* key, double& a, double& b) const {
    if (!has(key)) return;
    std::vector<double> v;
    read_list(key, v);
    if (v.size() != 2) fail(join(key), "expected two numbers");
    a = v[0];
    b = v[1];
  }

  void reject_unknown(std::initializer_list<const char*> known) const {
    for (const auto& item : node_.items()) {
      const bool ok = std::any_of(known.begin(), known.end(),
                                  [&](const char* k) { return item.key() == k; });
      if (!ok) fail(join(item.key().c_str()), "unknown key");
    }
  }

  [[noreturn]] static void fail(const std::string& where, const std::string& what) {
    throw ConfigError(where + ": " + what);
  }

  std::string join(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const json& node_;
  std::string path_;
};

void require(bool ok, const char* where, const std::string& what) {
  if (!ok) Reader::fail(where, what);
}

bool is_step_multiple(double t, double dt) {
  const double ratio = t / dt;
  const double n = std::round(ratio);
  return n >= 1.0 && std::abs(n * dt - t) <= 1e-12;
}

std::vector<double> sorted_times(const ExperimentConfig& config) {
  std::set<double> times(config.outputs.profile_times.begin(), config.outputs.profile_times.end());
  times.insert(config.outputs.error_times.begin(), config.outputs.error_times.end());
  return {times.begin(), times.end()};
}

const char* name(IndicatorField f) { return f == IndicatorField::flux ? "flux" : "solution"; }
const char* name(LossNormalization n) { return n == LossNormalization::sum ? "sum" : "mean"; }

}  // namespace

ExperimentConfig ExperimentConfig::parse(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("<root>: invalid JSON: ") + e.what());
  }
  ExperimentConfig c;
  const Reader r(root, "");
  r.reject_unknown({"pde", "discretization", "network", "training", "reference", "outputs", "sweep"});

  const Reader pde = r.child("pde");
  pde.reject_unknown({"flux", "flux_speed", "viscosity", "domain", "boundary", "initial_condition", "source"});
  pde.read("flux", c.flux);
  pde.read("flux_speed", c.flux_speed);
  pde.read("viscosity", c.viscosity);
  pde.read_pair("domain", c.x_left, c.x_right);
  pde.read_pair("boundary", c.u_left, c.u_right);
  pde.read("initial_condition", c.initial_condition);
  pde.read("source", c.source);

  const Reader disc = r.child("discretization");
  disc.reject_unknown({"n_points", "dt", "q_stages", "hybrid", "mask_dilation", "recompute_mask",
                       "recompute_interval", "indicator_field", "lambda_safety", "indicator"});
  auto& d = c.discretization;
  disc.read("n_points", d.n_points);
  disc.read("dt", d.dt);
  disc.read("q_stages", d.q);
  disc.read("hybrid", d.hybrid);
  disc.read("mask_dilation", d.mask_dilation);
  disc.read("recompute_mask", d.recompute_mask);
  disc.read("recompute_interval", d.recompute_interval);
  disc.read("lambda_safety", d.lambda_safety);
  std::string field = name(d.indicator_field);
  disc.read("indicator_field", field);
  if (field == "solution") {
    d.indicator_field = IndicatorField::solution;
  } else if (field == "flux") {
    d.indicator_field = IndicatorField::flux;
  } else {
    Reader::fail("discretization.indicator_field", "expected \"solution\" or \"flux\"");
  }
  const Reader ind = disc.child("indicator");
  ind.reject_unknown({"eps", "delta", "p", "c_t"});
  ind.read("eps", d.weno.eps);
  ind.read("delta", d.weno.delta);
  ind.read("p", d.weno.p);
  ind.read("c_t", d.weno.c_t);

  const Reader net = r.child("network");
  net.reject_unknown({"layers", "width", "seed"});
  net.read("layers", c.network.hidden_layers);
  net.read("width", c.network.width);
  net.read("seed", c.network.seed);

  const Reader tr = r.child("training");
  tr.reject_unknown({"lr", "tolerance", "max_iters", "warm_start", "loss_normalization"});
  tr.read("lr", c.training.learning_rate);
  tr.read("tolerance", c.training.loss_tolerance);
  tr.read("max_iters", c.training.max_iterations);
  tr.read("warm_start", c.training.warm_start);
  std::string norm = name(c.training.normalization);
  tr.read("loss_normalization", norm);
  if (norm == "mean") {
    c.training.normalization = LossNormalization::mean;
  } else if (norm == "sum") {
    c.training.normalization = LossNormalization::sum;
  } else {
    Reader::fail("training.loss_normalization", "expected \"mean\" or \"sum\"");
  }

  const Reader ref = r.child("reference");
  ref.reject_unknown({"n_cells", "cfl"});
  ref.read("n_cells", c.reference.n_cells);
  ref.read("cfl", c.reference.cfl);

  const Reader out = r.child("outputs");
  out.reject_unknown({"profile_times", "error_times", "dir", "include_baseline"});
  out.read_list("profile_times", c.outputs.profile_times);
  out.read_list("error_times", c.outputs.error_times);
  std::string dir = c.outputs.dir.string();
  out.read("dir", dir);
  c.outputs.dir = dir;
  out.read("include_baseline", c.outputs.include_baseline);

  const Reader sw = r.child("sweep");
  sw.reject_unknown({"q", "dt", "nu", "t_final"});
  sw.read_list("q", c.sweep.q);
  sw.read_list("dt", c.sweep.dt);
  sw.read_list("nu", c.sweep.nu);
  sw.read("t_final", c.sweep.t_final);

  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>: cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str());
}

void ExperimentConfig::validate() const {
  require(flux == "burgers" || flux == "linear", "pde.flux", "expected \"burgers\" or \"linear\"");
  require(std::isfinite(flux_speed), "pde.flux_speed", "must be finite");
  require(std::isfinite(viscosity) && viscosity >= 0.0, "pde.viscosity", "must be >= 0");
  require(x_left < x_right, "pde.domain", "left end must be below right end");
  require(std::isfinite(u_left) && std::isfinite(u_right), "pde.boundary", "must be finite");
  require(initial_condition == "neg_sin_pi_x", "pde.initial_condition",
          "only \"neg_sin_pi_x\" is supported");
  require(source == "none", "pde.source", "only \"none\" is supported");

  const auto& d = discretization;
  require(d.n_points >= 8, "discretization.n_points", "must be >= 8");
  require(d.dt > 0.0 && std::isfinite(d.dt), "discretization.dt", "must be > 0");
  require(d.q >= 1 && d.q <= irk::kMaxStages, "discretization.q_stages",
          "must lie in [1, " + std::to_string(irk::kMaxStages) + "]");
  require(d.mask_dilation >= 0, "discretization.mask_dilation", "must be >= 0");
  require(d.recompute_interval >= 1, "discretization.recompute_interval", "must be >= 1");
  require(d.lambda_safety >= 1.0, "discretization.lambda_safety", "must be >= 1");
  require(d.weno.eps > 0.0, "discretization.indicator.eps", "must be > 0");
  require(d.weno.delta > 0.0, "discretization.indicator.delta", "must be > 0");
  require(d.weno.p > 0.0, "discretization.indicator.p", "must be > 0");
  require(d.weno.c_t > 0.0 && d.weno.c_t < 0.25, "discretization.indicator.c_t",
          "must lie in (0, 0.25)");

  require(network.hidden_layers >= 1, "network.layers", "must be >= 1");
  require(network.width >= 1, "network.width", "must be >= 1");

  require(training.learning_rate > 0.0, "training.lr", "must be > 0");
  require(training.loss_tolerance > 0.0, "training.tolerance", "must be > 0");
  require(training.max_iterations >= 0, "training.max_iters", "must be >= 0");

  require(reference.n_cells >= 16, "reference.n_cells", "must be >= 16");
  require(reference.cfl > 0.0 && reference.cfl <= 1.0, "reference.cfl", "must lie in (0, 1]");

  require(!outputs.profile_times.empty() || !outputs.error_times.empty(), "outputs",
          "need at least one profile or error time");
  for (double t : outputs.profile_times) {
    require(is_step_multiple(t, d.dt), "outputs.profile_times",
            format_number(t) + " is not a positive multiple of dt");
  }
  for (double t : outputs.error_times) {
    require(is_step_multiple(t, d.dt), "outputs.error_times",
            format_number(t) + " is not a positive multiple of dt");
  }

  require(sweep.t_final > 0.0, "sweep.t_final", "must be > 0");
  for (int q : sweep.q) {
    require(q >= 1 && q <= irk::kMaxStages, "sweep.q", "entries must lie in [1, 100]");
  }
  for (double dt : sweep.dt) {
    require(dt > 0.0 && is_step_multiple(sweep.t_final, dt), "sweep.dt",
            format_number(dt) + " does not divide t_final");
  }
  for (double nu : sweep.nu) require(nu >= 0.0 && std::isfinite(nu), "sweep.nu", "entries must be >= 0");
}

PdeSpec ExperimentConfig::pde() const {
  PdeSpec p = PdeSpec::burgers(viscosity);
  p.flux.kind = flux == "linear" ? ConvectionFlux::Kind::linear : ConvectionFlux::Kind::burgers;
  p.flux.speed = flux_speed;
  p.x_left = x_left;
  p.x_right = x_right;
  p.u_left = u_left;
  p.u_right = u_right;
  return p;
}

double ExperimentConfig::t_final() const {
  const auto times = sorted_times(*this);
  return times.empty() ? 0.0 : times.back();
}

std::string ExperimentConfig::to_json() const {
  const auto& d = discretization;
  json j = {
      {"pde",
       {{"flux", flux},
        {"flux_speed", flux_speed},
        {"viscosity", viscosity},
        {"domain", {x_left, x_right}},
        {"boundary", {u_left, u_right}},
        {"initial_condition", initial_condition},
        {"source", source}}},
      {"discretization",
       {{"n_points", d.n_points},
        {"dt", d.dt},
        {"q_stages", d.q},
        {"hybrid", d.hybrid},
        {"mask_dilation", d.mask_dilation},
        {"recompute_mask", d.recompute_mask},
        {"recompute_interval", d.recompute_interval},
        {"indicator_field", name(d.indicator_field)},
        {"lambda_safety", d.lambda_safety},
        {"indicator", {{"eps", d.weno.eps}, {"delta", d.weno.delta}, {"p", d.weno.p}, {"c_t", d.weno.c_t}}}}},
      {"network", {{"layers", network.hidden_layers}, {"width", network.width}, {"seed", network.seed}}},
      {"training",
       {{"lr", training.learning_rate},
        {"tolerance", training.loss_tolerance},
        {"max_iters", training.max_iterations},
        {"warm_start", training.warm_start},
        {"loss_normalization", name(training.normalization)}}},
      {"reference", {{"n_cells", reference.n_cells}, {"cfl", reference.cfl}}},
      {"outputs",
       {{"profile_times", outputs.profile_times},
        {"error_times", outputs.error_times},
        {"dir", outputs.dir.string()},
        {"include_baseline", outputs.include_baseline}}},
      {"sweep", {{"q", sweep.q}, {"dt", sweep.dt}, {"nu", sweep.nu}, {"t_final", sweep.t_final}}},
  };
  return j.dump();
}

// ---------------------------------------------------------------------------
// Runs

namespace {

ref::SolverConfig solver_config(const ExperimentConfig& config, const PdeSpec& pde,
                                std::vector<double> times) {
  ref::SolverConfig s;
  s.n_cells = config.reference.n_cells;
  s.cfl = config.reference.cfl;
  s.pde = pde;
  s.snapshot_times = std::move(times);
  s.t_final = s.snapshot_times.empty() ? 0.0 : s.snapshot_times.back();
  s.weno = config.discretization.weno;
  return s;
}

std::string time_tag(double t) { return "t" + format_number(t); }

const ref::Snapshot& snapshot_at(const std::vector<ref::Snapshot>& snaps, double t) {
  for (const auto& s : snaps) {
    if (std::abs(s.t - t) < 1e-9) return s;
  }
  throw std::logic_error("no snapshot at t = " + format_number(t));
}

const GridField& trajectory_at(const MarchResult& m, double t) {
  for (const auto& s : m.trajectory) {
    if (std::abs(s.t - t) < 1e-9) return s.u;
  }
  throw std::logic_error("no march state at t = " + format_number(t));
}

MarchResult march_config(const ExperimentConfig& config, bool hybrid,
                         const std::vector<ref::Snapshot>& refs, const std::string& label,
                         const LogSink& log) {
  DiscretizationConfig disc = config.discretization;
  disc.hybrid = hybrid;
  return march(config.pde(), disc, config.network, config.training, config.t_final(), refs,
               [&](const StepDiagnostics& d) {
                 if (log) log(label + " " + d.to_json());
               });
}

std::string diagnostics_log(const ExperimentConfig& config, const MarchResult& m) {
  std::string out = "{\"config\": " + config.to_json() + "}\n";
  for (const auto& d : m.steps) out += d.to_json() + "\n";
  return out;
}

double error_at(const std::vector<ErrorSample>& errors, double t) {
  for (const auto& e : errors) {
    if (std::abs(e.t - t) < 1e-9) return e.relative_error;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

std::vector<ErrorSample> at_error_times(const std::vector<ErrorSample>& errors,
                                        const ExperimentConfig& config) {
  std::vector<ErrorSample> out;
  for (const auto& e : errors) {
    for (double t : config.outputs.error_times) {
      if (std::abs(e.t - t) < 1e-9) {
        out.push_back({t, e.relative_error});  // configured time, not n * dt
        break;
      }
    }
  }
  return out;
}

}  // namespace

std::vector<ref::Snapshot> reference_snapshots(const ExperimentConfig& config) {
  config.validate();
  return ref::solve(solver_config(config, config.pde(), sorted_times(config)));
}

RunSummary run_reference(const ExperimentConfig& config, const LogSink& log) {
  const auto snaps = reference_snapshots(config);
  RunSummary summary;
  for (double t : config.outputs.profile_times) {
    const auto& s = snapshot_at(snaps, t);
    std::string csv = "x,u\n";
    for (std::size_t j = 0; j < s.u.size(); ++j) {
      csv += format_number(s.u.x(j)) + "," + format_number(s.u[j]) + "\n";
    }
    const auto path = config.outputs.dir / ("reference_" + time_tag(t) + ".csv");
    write_file_atomic(path, csv);
    summary.files.push_back(path);
    if (log) log("wrote " + path.string());
  }
  return summary;
}

RunSummary run_experiment(const ExperimentConfig& config, const LogSink& log) {
  const auto refs = reference_snapshots(config);
  const MarchResult hybrid = march_config(config, true, refs, "hpinn", log);
  std::optional<MarchResult> baseline;
  if (config.outputs.include_baseline) baseline = march_config(config, false, refs, "baseline", log);

  RunSummary summary;
  summary.steps = hybrid.steps;
  summary.errors = at_error_times(hybrid.errors, config);
  if (baseline) {
    summary.baseline_steps = baseline->steps;
    summary.baseline_errors = at_error_times(baseline->errors, config);
  }
  const auto& dir = config.outputs.dir;

  for (double t : config.outputs.profile_times) {
    const GridField& u = trajectory_at(hybrid, t);
    const std::vector<double> xs = u.coordinates();
    const auto u_ref = ref::interpolate_cubic(snapshot_at(refs, t).u, xs);
    const GridField* ub = baseline ? &trajectory_at(*baseline, t) : nullptr;
    std::string csv = ub ? "x,u_hpinn,u_pinn_baseline,u_ref\n" : "x,u_hpinn,u_ref\n";
    for (std::size_t j = 0; j < xs.size(); ++j) {
      csv += format_number(xs[j]) + "," + format_number(u[j]) + ",";
      if (ub) csv += format_number((*ub)[j]) + ",";
      csv += format_number(u_ref[j]) + "\n";
    }
    const auto path = dir / ("profile_" + time_tag(t) + ".csv");
    write_file_atomic(path, csv);
    summary.files.push_back(path);
  }

  std::string errors = baseline ? "t,rel_error,rel_error_baseline\n" : "t,rel_error\n";
  for (const auto& e : summary.errors) {
    errors += format_number(e.t) + "," + format_number(e.relative_error);
    if (baseline) errors += "," + format_number(error_at(summary.baseline_errors, e.t));
    errors += "\n";
  }
  write_file_atomic(dir / "errors.csv", errors);
  summary.files.push_back(dir / "errors.csv");

  write_file_atomic(dir / "diagnostics.jsonl", diagnostics_log(config, hybrid));
  summary.files.push_back(dir / "diagnostics.jsonl");
  if (baseline) {
    write_file_atomic(dir / "baseline_diagnostics.jsonl", diagnostics_log(config, *baseline));
    summary.files.push_back(dir / "baseline_diagnostics.jsonl");
  }
  return summary;
}

RunSummary run_baseline(const ExperimentConfig& config, const LogSink& log) {
  const auto refs = reference_snapshots(config);
  ExperimentConfig resolved = config;
  resolved.discretization.hybrid = false;
  const MarchResult m = march_config(resolved, false, refs, "baseline", log);

  RunSummary summary;
  summary.baseline_steps = m.steps;
  summary.baseline_errors = at_error_times(m.errors, config);
  const auto& dir = config.outputs.dir;
  for (double t : config.outputs.profile_times) {
    const GridField& u = trajectory_at(m, t);
    const std::vector<double> xs = u.coordinates();
    const auto u_ref = ref::interpolate_cubic(snapshot_at(refs, t).u, xs);
    std::string csv = "x,u_pinn_baseline,u_ref\n";
    for (std::size_t j = 0; j < xs.size(); ++j) {
      csv += format_number(xs[j]) + "," + format_number(u[j]) + "," + format_number(u_ref[j]) + "\n";
    }
    const auto path = dir / ("baseline_profile_" + time_tag(t) + ".csv");
    write_file_atomic(path, csv);
    summary.files.push_back(path);
  }
  std::string errors = "t,rel_error\n";
  for (const auto& e : summary.baseline_errors) errors += format_number(e.t) + "," + format_number(e.relative_error) + "\n";
  write_file_atomic(dir / "baseline_errors.csv", errors);
  summary.files.push_back(dir / "baseline_errors.csv");
  write_file_atomic(dir / "baseline_diagnostics.jsonl", diagnostics_log(resolved, m));
  summary.files.push_back(dir / "baseline_diagnostics.jsonl");
  return summary;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& config, int jobs, const LogSink& log) {
  config.validate();
  if (jobs < 1) throw ConfigError("--jobs: must be >= 1");
  const double t_final = config.sweep.t_final;

  // One reference per viscosity, shared read-only by the cells.
  std::vector<std::vector<ref::Snapshot>> refs;
  for (double nu : config.sweep.nu) {
    ExperimentConfig c = config;
    c.viscosity = nu;
    refs.push_back(ref::solve(solver_config(c, c.pde(), {t_final})));
  }

  struct Cell {
    std::size_t nu_index;
    SweepRow row;
  };
  std::vector<Cell> cells;
  for (std::size_t k = 0; k < config.sweep.nu.size(); ++k) {
    for (int q : config.sweep.q) {
      for (double dt : config.sweep.dt) {
        Cell cell{k, {}};
        cell.row.q = q;
        cell.row.dt = dt;
        cell.row.nu = config.sweep.nu[k];
        cells.push_back(cell);
      }
    }
  }

  std::mutex log_mutex;
  auto emit = [&](const std::string& line) {
    if (!log) return;
    std::lock_guard lock(log_mutex);
    log(line);
  };

  auto run_cell = [&](Cell& cell) {
    SweepRow& row = cell.row;
    ExperimentConfig c = config;
    c.viscosity = row.nu;
    c.discretization.q = row.q;
    c.discretization.dt = row.dt;
    c.network.seed = cell_seed(config.network.seed, row.q, row.dt, row.nu);
    const std::string tag = "q=" + std::to_string(row.q) + " dt=" + format_number(row.dt) +
                            " nu=" + format_number(row.nu);
    try {
      const MarchResult m = march(c.pde(), c.discretization, c.network, c.training, t_final,
                                  refs[cell.nu_index], [&](const StepDiagnostics& d) {
                                    emit(tag + " " + d.to_json());
                                  });
      row.rel_error = error_at(m.errors, t_final);
      row.converged = true;
      for (const auto& d : m.steps) {
        row.iterations += d.iterations;
        row.converged = row.converged && d.converged;
      }
    } catch (const std::exception& e) {
      row.rel_error = std::numeric_limits<double>::quiet_NaN();
      row.converged = false;
      row.error = e.what();
      emit(tag + " failed: " + e.what());
    }
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) run_cell(cells[i]);
  };
  const int threads = std::min<int>(jobs, static_cast<int>(cells.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::vector<SweepRow> rows;
  std::string csv = "q,dt,nu,rel_error,iterations,converged,error\n";
  for (const auto& cell : cells) {
    const SweepRow& r = cell.row;
    std::string err = r.error;
    std::replace(err.begin(), err.end(), '"', '\'');
    std::replace(err.begin(), err.end(), '\n', ' ');
    csv += std::to_string(r.q) + "," + format_number(r.dt) + "," + format_number(r.nu) + "," +
           format_number(r.rel_error) + "," + std::to_string(r.iterations) + "," +
           (r.converged ? "true" : "false") + "," + (err.empty() ? "" : "\"" + err + "\"") + "\n";
    rows.push_back(r);
  }
  write_file_atomic(config.outputs.dir / "sweep.csv", csv);
  return rows;
}

}  // namespace hpinn
