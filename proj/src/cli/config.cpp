#include "sdelap/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "sdelap/error.hpp"
#include "sdelap/model/builtin.hpp"
#include "sdelap/model/params.hpp"

namespace sdelap::cli {

using Json = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::Config, where + ": " + what);
}

void only_keys(const Json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(where, "expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) fail(where, "unknown key \"" + k + "\"");
}

double number(const Json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(where, "must be finite");
  return v;
}

int integer(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<int>();
}

bool boolean(const Json& j, const std::string& where) {
  if (!j.is_boolean()) fail(where, "expected true or false");
  return j.get<bool>();
}

std::string text(const Json& j, const std::string& where) {
  if (!j.is_string()) fail(where, "expected a string");
  return j.get<std::string>();
}

std::vector<double> vector(const Json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

Eigen::VectorXd eigen(const std::vector<double>& v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()); }

std::vector<double> stdvec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

template <typename M>
std::vector<ParamEntry> defaults_of(const M& m) {
  std::vector<ParamEntry> out;
  const auto specs = ModelTraits<M>::specs();
  const auto values = ModelTraits<M>::values(m);
  for (std::size_t k = 0; k < specs.size(); ++k) out.push_back({specs[k].name, values[k], false, specs[k].positive});
  return out;
}

ModelBlock parse_model(const Json& j) {
  only_keys(j, "model", {"id", "coordinates", "params"});
  ModelBlock m;
  if (!j.contains("id")) fail("model", "missing \"id\"");
  m.id = text(j["id"], "model.id");
  m.params = model_defaults(m.id);
  m.coordinates = j.contains("coordinates") ? text(j["coordinates"], "model.coordinates") : "natural";
  if (m.coordinates != "natural" && m.coordinates != "log") fail("model.coordinates", "must be \"natural\" or \"log\"");
  if (m.coordinates == "log" && m.id == "ou") fail("model.coordinates", "the OU state is not positive");
  if (!j.contains("params")) return m;
  const Json& p = j["params"];
  if (!p.is_object()) fail("model.params", "expected an object");
  for (const auto& [name, v] : p.items()) {
    const std::string where = "model.params." + name;
    auto it = std::find_if(m.params.begin(), m.params.end(), [&](const ParamEntry& e) { return e.name == name; });
    if (it == m.params.end()) fail("model.params", "unknown parameter \"" + name + "\" for model " + m.id);
    if (v.is_number()) {
      it->value = number(v, where);
      continue;
    }
    only_keys(v, where, {"value", "fixed", "transform"});
    if (v.contains("value")) it->value = number(v["value"], where + ".value");
    if (v.contains("fixed")) it->fixed = boolean(v["fixed"], where + ".fixed");
    if (v.contains("transform")) {
      const std::string t = text(v["transform"], where + ".transform");
      if (t != "log" && t != "none") fail(where + ".transform", "must be \"log\" or \"none\"");
      it->log_transform = t == "log";
    }
  }
  for (const auto& e : m.params)
    if (e.log_transform && !e.fixed && !(e.value > 0.0))
      fail("model.params." + e.name, "a log-transformed parameter must be > 0");
  return m;
}

ObservationModel parse_observation(const Json& j, bool& sd_fixed) {
  if (!j.is_object() || !j.contains("type")) fail("observation", "expected an object with \"type\"");
  const std::string type = text(j["type"], "observation.type");
  if (type == "gaussian") {
    only_keys(j, "observation", {"type", "indices", "sd", "fixed"});
    GaussianAdditive g;
    if (j.contains("indices")) {
      if (!j["indices"].is_array()) fail("observation.indices", "expected an array of integers");
      g.indices.clear();
      for (const auto& i : j["indices"]) g.indices.push_back(integer(i, "observation.indices"));
    }
    if (j.contains("sd")) g.sd = number(j["sd"], "observation.sd");
    sd_fixed = j.contains("fixed") && boolean(j["fixed"], "observation.fixed");
    return g;
  }
  if (type == "poisson") {
    only_keys(j, "observation", {"type", "index", "volume"});
    PoissonScaled p;
    if (j.contains("index")) p.index = integer(j["index"], "observation.index");
    if (j.contains("volume")) p.volume = number(j["volume"], "observation.volume");
    return p;
  }
  fail("observation.type", "must be \"gaussian\" or \"poisson\"");
}

InitialCondition parse_initial(const Json& j) {
  if (!j.is_object() || !j.contains("type")) fail("initial", "expected an object with \"type\"");
  const std::string type = text(j["type"], "initial.type");
  if (type == "free") {
    only_keys(j, "initial", {"type"});
    return FreeInit{};
  }
  if (type == "dirac") {
    only_keys(j, "initial", {"type", "x0"});
    if (!j.contains("x0")) fail("initial", "missing \"x0\"");
    return DiracInit{eigen(vector(j["x0"], "initial.x0"))};
  }
  if (type == "gaussian") {
    only_keys(j, "initial", {"type", "mean", "cov"});
    if (!j.contains("mean") || !j.contains("cov")) fail("initial", "needs \"mean\" and \"cov\"");
    GaussianInit g;
    g.mean = eigen(vector(j["mean"], "initial.mean"));
    const Json& c = j["cov"];
    if (!c.is_array() || c.size() != static_cast<std::size_t>(g.mean.size()))
      fail("initial.cov", "expected a square array of rows matching the mean");
    g.cov.resize(g.mean.size(), g.mean.size());
    for (std::size_t r = 0; r < c.size(); ++r) {
      const auto row = vector(c[r], "initial.cov");
      if (row.size() != c.size()) fail("initial.cov", "rows must match the mean length");
      for (std::size_t k = 0; k < row.size(); ++k) g.cov(r, k) = row[k];
    }
    return g;
  }
  fail("initial.type", "must be \"free\", \"dirac\" or \"gaussian\"");
}

void check(bool ok, const std::string& where, const std::string& what) {
  if (!ok) fail(where, what);
}

}  // namespace

std::vector<ParamEntry> model_defaults(const std::string& id) {
  if (id == "ou") return defaults_of(models::Ou{});
  if (id == "gbm") return defaults_of(models::Gbm{});
  if (id == "cir") return defaults_of(models::Cir{});
  if (id == "rma") return defaults_of(models::Rma{});
  fail("model.id", "unknown model \"" + id + "\" (ou, gbm, cir, rma)");
}

int model_dim(const std::string& id) { return id == "rma" ? 2 : 1; }

RunConfig parse_config(const std::string& source) {
  Json j;
  try {
    j = Json::parse(source);
  } catch (const Json::parse_error& e) {
    fail("config", std::string("invalid JSON: ") + e.what());
  }
  only_keys(j, "config", {"model", "formulation", "substeps", "tiny_eps", "mollifier_eps", "t0", "observation",
                          "initial", "simulation", "transition", "fit", "threads", "data", "out"});
  RunConfig c;
  if (!j.contains("model")) fail("config", "missing \"model\"");
  c.model = parse_model(j["model"]);
  const int n = model_dim(c.model.id);
  if (j.contains("formulation")) {
    const auto f = parse_formulation(text(j["formulation"], "formulation"));
    if (!f) fail("formulation", "must be one of db, xdb, x, s, naive, naive_exact");
    c.formulation = *f;
  }
  if (j.contains("substeps")) c.substeps = integer(j["substeps"], "substeps");
  check(c.substeps >= 1, "substeps", "must be >= 1");
  if (j.contains("tiny_eps")) c.options.tiny_eps = number(j["tiny_eps"], "tiny_eps");
  check(c.options.tiny_eps > 0.0, "tiny_eps", "must be > 0");
  if (j.contains("mollifier_eps")) c.options.mollifier_eps = number(j["mollifier_eps"], "mollifier_eps");
  check(c.options.mollifier_eps > 0.0, "mollifier_eps", "must be > 0");
  if (j.contains("t0")) c.t0 = number(j["t0"], "t0");
  if (j.contains("observation")) c.observation = parse_observation(j["observation"], c.obs_sd_fixed);
  if (j.contains("initial")) c.initial = parse_initial(j["initial"]);
  try {
    validate(c.observation, n);
    validate(c.initial, n);
  } catch (const Error& e) {
    fail("observation/initial", e.what());
  }

  c.simulation.x0.assign(n, 1.0);
  if (j.contains("simulation")) {
    const Json& s = j["simulation"];
    only_keys(s, "simulation", {"T", "h", "substeps", "x0", "seed"});
    if (s.contains("T")) c.simulation.T = number(s["T"], "simulation.T");
    if (s.contains("h")) c.simulation.h = number(s["h"], "simulation.h");
    if (s.contains("substeps")) c.simulation.substeps = integer(s["substeps"], "simulation.substeps");
    if (s.contains("x0")) c.simulation.x0 = vector(s["x0"], "simulation.x0");
    if (s.contains("seed")) {
      if (!s["seed"].is_number_unsigned()) fail("simulation.seed", "expected a non-negative integer");
      c.simulation.seed = s["seed"].get<unsigned long long>();
    }
  }
  check(c.simulation.T > 0.0 && c.simulation.h > 0.0, "simulation", "T and h must be > 0");
  check(c.simulation.substeps >= 1, "simulation.substeps", "must be >= 1");
  check(static_cast<int>(c.simulation.x0.size()) == n, "simulation.x0", "length must match the state dimension");

  c.transition.x.assign(n, 1.0);
  if (j.contains("transition")) {
    const Json& t = j["transition"];
    only_keys(t, "transition", {"x", "s", "t", "substeps", "ygrid", "method"});
    if (t.contains("x")) c.transition.x = vector(t["x"], "transition.x");
    if (t.contains("s")) c.transition.s = number(t["s"], "transition.s");
    if (t.contains("t")) c.transition.t = number(t["t"], "transition.t");
    if (t.contains("substeps")) c.transition.substeps = integer(t["substeps"], "transition.substeps");
    if (t.contains("method")) c.transition.method = text(t["method"], "transition.method");
    if (t.contains("ygrid")) {
      const Json& g = t["ygrid"];
      only_keys(g, "transition.ygrid", {"from", "to", "count"});
      if (g.contains("from")) c.transition.ygrid.from = number(g["from"], "transition.ygrid.from");
      if (g.contains("to")) c.transition.ygrid.to = number(g["to"], "transition.ygrid.to");
      if (g.contains("count")) c.transition.ygrid.count = integer(g["count"], "transition.ygrid.count");
    }
  }
  check(static_cast<int>(c.transition.x.size()) == n, "transition.x", "length must match the state dimension");
  check(c.transition.t > c.transition.s, "transition", "t must exceed s");
  check(c.transition.substeps >= 1, "transition.substeps", "must be >= 1");
  check(c.transition.ygrid.count >= 1, "transition.ygrid.count", "must be >= 1");
  check(c.transition.ygrid.to >= c.transition.ygrid.from, "transition.ygrid", "to must be >= from");
  const std::set<std::string> methods{"db", "xdb", "x", "s", "all"};
  check(methods.count(c.transition.method) > 0, "transition.method", "must be db, xdb, x, s or all");

  if (j.contains("fit")) {
    const Json& f = j["fit"];
    only_keys(f, "fit", {"max_iters", "grad_tol"});
    if (f.contains("max_iters")) c.fit.max_iters = integer(f["max_iters"], "fit.max_iters");
    if (f.contains("grad_tol")) c.fit.grad_tol = number(f["grad_tol"], "fit.grad_tol");
  }
  check(c.fit.max_iters >= 0 && c.fit.grad_tol > 0.0, "fit", "max_iters >= 0 and grad_tol > 0 required");
  if (j.contains("threads")) c.threads = integer(j["threads"], "threads");
  check(c.threads >= 0, "threads", "must be >= 0");
  if (j.contains("data")) c.data = text(j["data"], "data");
  if (j.contains("out")) c.out = text(j["out"], "out");
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
  Json j;
  Json params = Json::object();
  for (const auto& p : c.model.params)
    params[p.name] = {{"value", p.value}, {"fixed", p.fixed}, {"transform", p.log_transform ? "log" : "none"}};
  j["model"] = {{"id", c.model.id}, {"coordinates", c.model.coordinates}, {"params", params}};
  j["formulation"] = std::string(to_string(c.formulation));
  j["substeps"] = c.substeps;
  j["tiny_eps"] = c.options.tiny_eps;
  j["mollifier_eps"] = c.options.mollifier_eps;
  j["t0"] = c.t0;
  if (const auto* g = std::get_if<GaussianAdditive>(&c.observation))
    j["observation"] = {{"type", "gaussian"}, {"indices", g->indices}, {"sd", g->sd}, {"fixed", c.obs_sd_fixed}};
  else {
    const auto& p = std::get<PoissonScaled>(c.observation);
    j["observation"] = {{"type", "poisson"}, {"index", p.index}, {"volume", p.volume}};
  }
  if (const auto* d = std::get_if<DiracInit>(&c.initial))
    j["initial"] = {{"type", "dirac"}, {"x0", stdvec(d->x0)}};
  else if (const auto* g = std::get_if<GaussianInit>(&c.initial)) {
    Json cov = Json::array();
    for (Eigen::Index r = 0; r < g->cov.rows(); ++r) cov.push_back(stdvec(g->cov.row(r).transpose()));
    j["initial"] = {{"type", "gaussian"}, {"mean", stdvec(g->mean)}, {"cov", cov}};
  } else {
    j["initial"] = {{"type", "free"}};
  }
  j["simulation"] = {{"T", c.simulation.T},
                     {"h", c.simulation.h},
                     {"substeps", c.simulation.substeps},
                     {"x0", c.simulation.x0},
                     {"seed", c.simulation.seed}};
  j["transition"] = {{"x", c.transition.x},
                     {"s", c.transition.s},
                     {"t", c.transition.t},
                     {"substeps", c.transition.substeps},
                     {"ygrid", {{"from", c.transition.ygrid.from}, {"to", c.transition.ygrid.to},
                                {"count", c.transition.ygrid.count}}},
                     {"method", c.transition.method}};
  j["fit"] = {{"max_iters", c.fit.max_iters}, {"grad_tol", c.fit.grad_tol}};
  j["threads"] = c.threads;
  j["data"] = c.data;
  j["out"] = c.out;
  return j.dump(2) + "\n";
}

}  // namespace sdelap::cli
