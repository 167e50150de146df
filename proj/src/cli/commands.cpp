#include "sdelap/cli/commands.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "sdelap/cli/csv.hpp"
#include "sdelap/inference/fit.hpp"
#include "sdelap/inference/marginal.hpp"
#include "sdelap/inference/parallel.hpp"
#include "sdelap/inference/transition.hpp"
#include "sdelap/model/builtin.hpp"
#include "sdelap/model/log_state.hpp"
#include "sdelap/model/params.hpp"
#include "sdelap/oracles/exact.hpp"
#include "sdelap/oracles/simulate.hpp"

namespace sdelap::cli {

using Json = nlohmann::ordered_json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> param_values(const RunConfig& c) {
  std::vector<double> v;
  for (const auto& p : c.model.params) v.push_back(p.value);
  return v;
}

template <typename M>
M make(const RunConfig& c) {
  const auto v = param_values(c);
  return ModelTraits<M>::make(v);
}

/// Calls f with the model in the configured coordinates.
template <typename F>
int with_model(const RunConfig& c, F&& f) {
  const bool log = c.model.coordinates == "log";
  if (c.model.id == "ou") return f(make<models::Ou>(c));
  if (c.model.id == "gbm")
    return log ? f(make<models::LogState<models::Gbm>>(c)) : f(make<models::Gbm>(c));
  if (c.model.id == "cir")
    return log ? f(make<models::LogState<models::Cir>>(c)) : f(make<models::Cir>(c));
  if (c.model.id == "rma")
    return log ? f(make<models::LogState<models::Rma>>(c)) : f(make<models::Rma>(c));
  throw Error(ErrorKind::Config, "unknown model " + c.model.id);
}

/// Same, always in natural coordinates (simulation).
template <typename F>
int with_natural_model(const RunConfig& c, F&& f) {
  RunConfig n = c;
  n.model.coordinates = "natural";
  return with_model(n, std::forward<F>(f));
}

SeriesSetup series_setup(const RunConfig& c) {
  SeriesSetup s;
  s.obs = c.observation;
  s.init = c.initial;
  s.formulation = c.formulation;
  s.substeps = c.substeps;
  s.options = c.options;
  return s;
}

ObservationSeries read_series(const RunConfig& c) {
  if (c.data.empty()) throw Error(ErrorKind::Config, "no data file (set \"data\" or --data)");
  const Table t = read_csv_file(c.data);
  const int width = observation_width(c.observation);
  if (static_cast<int>(t.header.size()) != width + 1)
    throw Error(ErrorKind::Config, c.data + ": expected columns t,y1..y" + std::to_string(width));
  ObservationSeries s;
  s.t0 = c.t0;
  for (const auto& row : t.rows) {
    s.times.push_back(row[0]);
    s.values.emplace_back(row.begin() + 1, row.end());
  }
  try {
    s.validate(width);
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, c.data + ": " + e.what());
  }
  return s;
}

std::vector<double> y_grid(const YGrid& g) {
  std::vector<double> ys;
  if (g.count == 1) return {g.from};
  for (int i = 0; i < g.count; ++i) ys.push_back(g.from + (g.to - g.from) * i / (g.count - 1));
  return ys;
}

/// Closed-form log density in natural coordinates, NaN when unavailable.
double exact_logpdf(const RunConfig& c, double x, double y, double dt) {
  const auto v = param_values(c);
  try {
    if (c.model.id == "ou") return oracles::ou_exact_logpdf(v[0], v[1], v[2], x, y, dt);
    if (c.model.id == "gbm") return oracles::gbm_exact_logpdf(v[0], v[1], x, y, dt);
    if (c.model.id == "cir") return oracles::cir_exact_logpdf(v[0], v[1], v[2], x, y, dt);
  } catch (const Error&) {
  }
  return kNaN;
}

bool has_exact(const RunConfig& c) { return c.model.id != "rma"; }

/// Writes to the configured file, or to `out` for "" and "-".
void emit_csv(const RunConfig& c, const Table& t, std::ostream& out) {
  if (c.out.empty() || c.out == "-")
    write_csv(out, t);
  else
    write_csv_file(c.out, t);
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

int cmd_simulate(const RunConfig& c, std::ostream& out, std::ostream&) {
  return with_natural_model(c, [&](const auto& m) {
    oracles::SimConfig sc;
    sc.t0 = c.t0;
    sc.T = c.simulation.T;
    sc.h = c.simulation.h;
    sc.sim_substeps = c.simulation.substeps;
    sc.x0 = Eigen::Map<const Eigen::VectorXd>(c.simulation.x0.data(), c.simulation.x0.size());
    sc.seed = c.simulation.seed;
    const auto sim = oracles::simulate(m, c.observation, sc);
    const std::string prefix = c.out.empty() ? "sim" : c.out;

    Table path;
    path.header.push_back("t");
    for (std::size_t j = 0; j < c.simulation.x0.size(); ++j) path.header.push_back("x" + std::to_string(j + 1));
    for (std::size_t i = 0; i < sim.times.size(); ++i) {
      std::vector<double> row{sim.times[i]};
      for (Eigen::Index j = 0; j < sim.path[i].size(); ++j) row.push_back(sim.path[i][j]);
      path.rows.push_back(std::move(row));
    }
    write_csv_file(prefix + "_path.csv", path);

    Table obs;
    obs.header.push_back("t");
    for (int j = 0; j < observation_width(c.observation); ++j) obs.header.push_back("y" + std::to_string(j + 1));
    const auto& o = sim.observations;
    for (std::size_t k = 0; k < o.size(); ++k) {
      std::vector<double> row{o.times[k]};
      row.insert(row.end(), o.values[k].begin(), o.values[k].end());
      obs.rows.push_back(std::move(row));
    }
    write_csv_file(prefix + "_obs.csv", obs);

    Table summary{{"n_obs", "T"}, {{static_cast<double>(o.size()), c.simulation.T}}};
    write_csv(out, summary);
    return kOk;
  });
}

int cmd_transdens(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const std::vector<std::string> methods =
      c.transition.method == "all" ? std::vector<std::string>{"db", "xdb", "x", "s"}
                                   : std::vector<std::string>{c.transition.method};
  const auto ys = y_grid(c.transition.ygrid);
  const int threads = resolve_threads(c.threads);
  Table t;
  t.header.push_back("y");
  for (const auto& name : methods) t.header.push_back("logp_" + name);
  if (has_exact(c)) t.header.push_back("logp_exact");
  t.rows.assign(ys.size(), {});
  for (std::size_t i = 0; i < ys.size(); ++i) t.rows[i].push_back(ys[i]);

  with_model(c, [&](const auto& m) {
    TransitionQuery q;
    q.s = c.transition.s;
    q.t = c.transition.t;
    q.x = Eigen::Map<const Eigen::VectorXd>(c.transition.x.data(), c.transition.x.size());
    q.y = q.x;
    q.substeps = c.transition.substeps;
    q.options = c.options;
    for (const auto& name : methods) {
      q.formulation = *parse_formulation(name);
      const auto sweep = density_sweep(m, q, ys, NewtonConfig{}, threads);
      for (std::size_t i = 0; i < ys.size(); ++i) {
        t.rows[i].push_back(sweep[i].error.empty() ? sweep[i].logp : kNaN);
        if (!sweep[i].error.empty())
          err << "y=" << format_number(ys[i]) << " method " << name << ": " << sweep[i].error << '\n';
      }
    }
    return kOk;
  });
  if (has_exact(c))
    for (std::size_t i = 0; i < ys.size(); ++i)
      t.rows[i].push_back(exact_logpdf(c, c.transition.x[0], ys[i], c.transition.t - c.transition.s));
  emit_csv(c, t, out);
  return kOk;
}

int cmd_fit(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const ObservationSeries data = read_series(c);
  const SeriesSetup setup = series_setup(c);
  std::vector<Param> params;
  for (const auto& p : c.model.params) params.push_back({p.name, p.value, p.fixed, p.log_transform});
  if (const auto* g = std::get_if<GaussianAdditive>(&c.observation))
    params.push_back({"s", g->sd, c.obs_sd_fixed, true});
  FitOptions opts;
  opts.max_iters = c.fit.max_iters;
  opts.grad_tol = c.fit.grad_tol;
  opts.threads = resolve_threads(c.threads);

  FitResult r;
  with_model(c, [&](const auto& m) {
    using M = std::decay_t<decltype(m)>;
    r = fit<M>(data, setup, params, opts);
    return kOk;
  });

  Json report;
  report["model"] = c.model.id;
  report["coordinates"] = c.model.coordinates;
  report["formulation"] = std::string(to_string(c.formulation));
  report["loglik"] = r.loglik;
  Json ps = Json::object();
  for (std::size_t k = 0; k < r.params.size(); ++k)
    ps[r.params[k].name] = {{"estimate", r.params[k].value}, {"sd", number_or_null(r.sd[k])},
                            {"fixed", r.params[k].fixed}};
  report["params"] = ps;
  report["convergence"] = {{"converged", r.converged},   {"iterations", r.iterations},
                           {"evaluations", r.evaluations}, {"grad_norm", r.grad_norm},
                           {"hessian_pd", r.hessian_pd},   {"message", r.message}};
  if (!c.out.empty()) {
    std::ofstream f(c.out);
    if (!f) throw Error(ErrorKind::InvalidArgument, "cannot write " + c.out);
    f << std::setw(2) << report << '\n';
  }

  out << std::left << std::setw(12) << "parameter" << std::setw(16) << "Estimate" << "std.dev\n";
  for (std::size_t k = 0; k < r.params.size(); ++k) {
    const bool show_sd = !r.params[k].fixed && std::isfinite(r.sd[k]);
    std::ostringstream est, sd;
    est << std::setprecision(6) << r.params[k].value;
    if (show_sd)
      sd << std::setprecision(4) << r.sd[k];
    else
      sd << "-";
    out << std::setw(12) << r.params[k].name << std::setw(16) << est.str() << sd.str() << '\n';
  }
  out << std::setw(12) << "loglik" << std::setprecision(10) << r.loglik << '\n';
  if (!r.message.empty()) err << "fit: " << r.message << '\n';
  return r.converged ? kOk : kNoConvergence;
}

void apply_theta(RunConfig& c, const std::string& theta) {
  if (theta.empty()) return;
  std::vector<std::pair<std::string, double>> values;
  if (theta.size() > 5 && theta.substr(theta.size() - 5) == ".json") {
    std::ifstream in(theta);
    if (!in) throw Error(ErrorKind::Config, "cannot open " + theta);
    Json j;
    try {
      in >> j;
    } catch (const Json::exception& e) {
      throw Error(ErrorKind::Config, theta + ": " + e.what());
    }
    if (!j.contains("params") || !j["params"].is_object()) throw Error(ErrorKind::Config, theta + ": no params block");
    for (const auto& [name, v] : j["params"].items()) {
      if (!v.contains("estimate") || !v["estimate"].is_number())
        throw Error(ErrorKind::Config, theta + ": parameter " + name + " has no estimate");
      values.emplace_back(name, v["estimate"].get<double>());
    }
  } else {
    std::stringstream ss(theta);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw Error(ErrorKind::Config, "--theta entries must be name=value");
      char* end = nullptr;
      const std::string num = item.substr(eq + 1);
      const double v = std::strtod(num.c_str(), &end);
      if (num.empty() || *end != '\0' || !std::isfinite(v))
        throw Error(ErrorKind::Config, "--theta: bad value for " + item.substr(0, eq));
      values.emplace_back(item.substr(0, eq), v);
    }
  }
  for (const auto& [name, v] : values) {
    bool found = false;
    for (auto& p : c.model.params)
      if (p.name == name) p.value = v, found = true;
    if (name == "s")
      if (auto* g = std::get_if<GaussianAdditive>(&c.observation)) g->sd = v, found = true;
    if (!found) throw Error(ErrorKind::Config, "--theta: unknown parameter " + name);
  }
}

int cmd_smooth(const RunConfig& config, const std::string& theta, std::ostream& out, std::ostream&) {
  RunConfig c = config;
  apply_theta(c, theta);
  const ObservationSeries data = read_series(c);
  const SeriesSetup setup = series_setup(c);
  return with_model(c, [&](const auto& m) {
    const int n = std::decay_t<decltype(m)>::dim;
    const SmoothResult sm = smooth(m, data, setup);
    Table t;
    t.header.push_back("t");
    for (int j = 0; j < n; ++j) t.header.push_back("mean_" + std::to_string(j + 1));
    for (int j = 0; j < n; ++j) t.header.push_back("sd_" + std::to_string(j + 1));
    for (std::size_t i = 0; i < sm.times.size(); ++i) {
      std::vector<double> row{sm.times[i]};
      for (int j = 0; j < n; ++j) row.push_back(sm.mean[i][j]);
      for (int j = 0; j < n; ++j) row.push_back(sm.sd[i][j]);
      t.rows.push_back(std::move(row));
    }
    emit_csv(c, t, out);
    return kOk;
  });
}

}  // namespace sdelap::cli
