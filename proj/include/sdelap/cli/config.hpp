#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sdelap/model/initial.hpp"
#include "sdelap/model/observation.hpp"
#include "sdelap/objective/formulation.hpp"

namespace sdelap::cli {

struct ParamEntry {
  std::string name;
  double value = 0.0;
  bool fixed = false;
  bool log_transform = true;  // estimated on the log scale
};

/// Built-in model ids: ou, gbm, cir, rma. Coordinates "natural" or "log"
/// (log only for positive models).
struct ModelBlock {
  std::string id;
  std::string coordinates = "natural";
  std::vector<ParamEntry> params;  // specification order, all present after parsing
};

struct SimulationBlock {
  double T = 10.0;
  double h = 1.0;
  int substeps = 100;
  std::vector<double> x0;
  unsigned long long seed = 1;
};

struct YGrid {
  double from = 0.1;
  double to = 3.0;
  int count = 25;
};

struct TransitionBlock {
  std::vector<double> x;
  double s = 0.0;
  double t = 1.0;
  int substeps = 64;
  YGrid ygrid;
  std::string method = "all";  // db, xdb, x, s or all
};

struct FitBlock {
  int max_iters = 200;
  double grad_tol = 1e-4;
};

/// One experiment: model, observation law, discretization and command settings.
struct RunConfig {
  ModelBlock model;
  Formulation formulation = Formulation::XDB;
  int substeps = 8;
  FormulationOptions options;
  double t0 = 0.0;
  ObservationModel observation = GaussianAdditive{};
  bool obs_sd_fixed = false;  // Gaussian sd enters fits as parameter "s"
  InitialCondition initial = FreeInit{};
  SimulationBlock simulation;
  TransitionBlock transition;
  FitBlock fit;
  int threads = 0;  // 0: SDELAP_THREADS or 1
  std::string data;
  std::string out;
};

/// Parses and validates JSON text; unknown keys, wrong types and bad values
/// throw Error(Config).
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
/// Fully explicit JSON; parse_config(serialize_config(c)) reproduces c.
std::string serialize_config(const RunConfig& c);

/// Parameter names and defaults of a built-in model, in specification order.
std::vector<ParamEntry> model_defaults(const std::string& id);
int model_dim(const std::string& id);

}  // namespace sdelap::cli
