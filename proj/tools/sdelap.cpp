#include <iostream>
#include <sstream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "sdelap/cli/commands.hpp"
#include "sdelap/cli/config.hpp"
#include "sdelap/error.hpp"

namespace {

using namespace sdelap;
using namespace sdelap::cli;

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw Error(ErrorKind::Config, "not a number list: " + s);
    out.push_back(v);
  }
  return out;
}

YGrid parse_ygrid(const std::string& s) {
  const auto a = s.find(':');
  const auto b = s.find(':', a == std::string::npos ? a : a + 1);
  if (a == std::string::npos || b == std::string::npos) throw Error(ErrorKind::Config, "--ygrid must be a:b:n");
  YGrid g;
  try {
    g.from = std::stod(s.substr(0, a));
    g.to = std::stod(s.substr(a + 1, b - a - 1));
    g.count = std::stoi(s.substr(b + 1));
  } catch (const std::exception&) {
    throw Error(ErrorKind::Config, "--ygrid must be a:b:n");
  }
  if (g.count < 1 || g.to < g.from) throw Error(ErrorKind::Config, "--ygrid needs n >= 1 and b >= a");
  return g;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maximum likelihood and smoothing for SDEs by Laplace approximation"};
  app.require_subcommand(1);
  std::string config_path, out_path, data_path, theta, x, ygrid, method;
  std::optional<unsigned long long> seed;
  std::optional<double> t;
  int threads = -1;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--threads", threads, "worker threads (default: SDELAP_THREADS or 1)");
  };
  auto* sim = app.add_subcommand("simulate", "simulate a path and observations");
  common(sim);
  sim->add_option("--seed", seed, "override simulation.seed");
  sim->add_option("--out", out_path, "output prefix for <prefix>_path.csv and <prefix>_obs.csv");
  auto* td = app.add_subcommand("transdens", "transition density sweep");
  common(td);
  td->add_option("--x", x, "initial state, comma separated");
  td->add_option("--t", t, "end time");
  td->add_option("--ygrid", ygrid, "endpoint grid a:b:n");
  td->add_option("--method", method, "db, xdb, x, s or all");
  td->add_option("--out", out_path, "CSV file (default stdout)");
  auto* ft = app.add_subcommand("fit", "maximum likelihood estimation");
  common(ft);
  ft->add_option("--data", data_path, "observations CSV t,y1..ym");
  ft->add_option("--out", out_path, "JSON report file");
  auto* sm = app.add_subcommand("smooth", "posterior mode and sd along the grid");
  common(sm);
  sm->add_option("--data", data_path, "observations CSV t,y1..ym");
  sm->add_option("--theta", theta, "fit report (.json) or name=value,...");
  sm->add_option("--out", out_path, "CSV file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    RunConfig cfg = load_config(config_path);
    if (threads >= 0) cfg.threads = threads;
    if (!out_path.empty()) cfg.out = out_path;
    if (!data_path.empty()) cfg.data = data_path;
    if (sim->parsed()) {
      if (seed) cfg.simulation.seed = *seed;
      return cmd_simulate(cfg, std::cout, std::cerr);
    }
    if (td->parsed()) {
      if (!x.empty()) cfg.transition.x = parse_list(x);
      if (cfg.transition.x.size() != static_cast<std::size_t>(model_dim(cfg.model.id)))
        throw Error(ErrorKind::Config, "--x length must match the state dimension");
      if (t) cfg.transition.t = *t;
      if (!(cfg.transition.t > cfg.transition.s)) throw Error(ErrorKind::Config, "--t must exceed transition.s");
      if (!ygrid.empty()) cfg.transition.ygrid = parse_ygrid(ygrid);
      if (!method.empty()) {
        if (method != "db" && method != "xdb" && method != "x" && method != "s" && method != "all")
          throw Error(ErrorKind::Config, "--method must be db, xdb, x, s or all");
        cfg.transition.method = method;
      }
      return cmd_transdens(cfg, std::cout, std::cerr);
    }
    if (ft->parsed()) return cmd_fit(cfg, std::cout, std::cerr);
    return cmd_smooth(cfg, theta, std::cout, std::cerr);
  } catch (const Error& e) {
    std::cerr << "sdelap: " << e.what() << '\n';
    if (e.kind() == ErrorKind::Config || e.kind() == ErrorKind::InvalidArgument) return kConfigError;
    if (e.kind() == ErrorKind::NoConvergence) return kNoConvergence;
    return kRuntimeError;
  } catch (const std::exception& e) {
    std::cerr << "sdelap: " << e.what() << '\n';
    return kRuntimeError;
  }
}
