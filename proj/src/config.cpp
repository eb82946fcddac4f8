#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "apspic/experiments.hpp"

namespace apspic {

using nlohmann::json;

std::string to_string(Scheme s) { return s == Scheme::apsi1 ? "APSI1" : "APSI2"; }

std::string to_string(Study s) {
  switch (s) {
    case Study::trajectory:
      return "trajectory";
    case Study::expectation:
      return "expectation";
    case Study::weak_order:
      return "weak-order";
  }
  return "?";
}

std::string to_string(GcModel g) {
  switch (g) {
    case GcModel::r0_euler:
      return "R0-euler";
    case GcModel::r0_si2:
      return "R0-si2";
    case GcModel::r_euler:
      return "R-euler";
  }
  return "?";
}

namespace {

std::string to_string(V0Mode m) { return m == V0Mode::fixed ? "fixed" : "order-epsilon"; }
std::string to_string(BoundaryCondition b) { return b == BoundaryCondition::dirichlet ? "dirichlet" : "periodic"; }
std::string to_string(BackgroundMode m) { return m == BackgroundMode::zero ? "zero" : "spatial-mean"; }

bool nearly_integral(double ratio, double tol) { return std::abs(ratio - std::round(ratio)) <= tol; }

// ---- JSON field access -------------------------------------------------------

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object", where);
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where, key);
}

double number(const json& obj, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number()) throw ConfigError("'" + key + "' must be a number", key);
  return obj.at(key).get<double>();
}

double required_number(const json& obj, const std::string& key) {
  if (!obj.contains(key)) throw ConfigError("missing required key '" + key + "'", key);
  return number(obj, key, 0.0);
}

long long integer(const json& obj, const std::string& key, long long fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number_integer()) throw ConfigError("'" + key + "' must be an integer", key);
  return obj.at(key).get<long long>();
}

std::uint64_t unsigned_integer(const json& obj, const std::string& key, std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
    throw ConfigError("'" + key + "' must be a non-negative integer", key);
  return v.get<std::uint64_t>();
}

std::string text(const json& obj, const std::string& key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_string()) throw ConfigError("'" + key + "' must be a string", key);
  return obj.at(key).get<std::string>();
}

std::vector<double> number_list(const json& obj, const std::string& key) {
  const json& v = obj.at(key);
  if (!v.is_array()) throw ConfigError("'" + key + "' must be an array of numbers", key);
  std::vector<double> out;
  for (const json& x : v) {
    if (!x.is_number()) throw ConfigError("'" + key + "' must be an array of numbers", key);
    out.push_back(x.get<double>());
  }
  return out;
}

Vec2d vec2(const json& obj, const std::string& key, const Vec2d& fallback) {
  if (!obj.contains(key)) return fallback;
  const auto v = number_list(obj, key);
  if (v.size() != 2) throw ConfigError("'" + key + "' must have two components", key);
  return {v[0], v[1]};
}

template <typename Enum>
Enum choice(const json& obj, const std::string& key, Enum fallback,
            const std::vector<std::pair<std::string, Enum>>& options) {
  if (!obj.contains(key)) return fallback;
  const std::string s = text(obj, key, "");
  for (const auto& [name, value] : options)
    if (name == s) return value;
  throw ConfigError("invalid value '" + s + "' for '" + key + "'", key);
}

const std::vector<std::pair<std::string, Scheme>> kSchemes{{"APSI1", Scheme::apsi1}, {"APSI2", Scheme::apsi2}};

// ---- parsing -----------------------------------------------------------------

BenchmarkConfig parse_benchmark(const json& j) {
  check_keys(j,
             {"kind", "name", "study", "scheme", "eps_list", "dt", "dt_list", "T", "sigma", "tau", "x0", "v0",
              "v0_mode", "n_paths", "gc_model", "seed", "reference_refinement"},
             "benchmark config");
  BenchmarkConfig c;
  c.name = text(j, "name", "custom");
  c.study = choice(j, "study", Study::trajectory,
                   {{"trajectory", Study::trajectory},
                    {"expectation", Study::expectation},
                    {"weak-order", Study::weak_order}});
  c.scheme = choice(j, "scheme", Scheme::apsi1, kSchemes);
  if (!j.contains("eps_list")) throw ConfigError("missing required key 'eps_list'", "eps_list");
  c.eps_list = number_list(j, "eps_list");
  if (j.contains("dt") == j.contains("dt_list")) throw ConfigError("give exactly one of 'dt' or 'dt_list'", "dt");
  c.dt_list = j.contains("dt") ? std::vector<double>{required_number(j, "dt")} : number_list(j, "dt_list");
  c.T = required_number(j, "T");
  c.sigma = number(j, "sigma", c.sigma);
  c.tau = number(j, "tau", c.tau);
  c.x0 = vec2(j, "x0", c.x0);
  c.v0 = vec2(j, "v0", c.v0);
  c.v0_mode = choice(j, "v0_mode", V0Mode::fixed,
                     {{"fixed", V0Mode::fixed}, {"order-epsilon", V0Mode::order_epsilon}});
  c.n_paths = static_cast<int>(integer(j, "n_paths", 1));
  c.gc_model = choice(j, "gc_model", GcModel::r0_euler,
                      {{"R0-euler", GcModel::r0_euler}, {"R0-si2", GcModel::r0_si2}, {"R-euler", GcModel::r_euler}});
  c.seed = unsigned_integer(j, "seed", c.seed);
  c.reference_refinement = static_cast<int>(integer(j, "reference_refinement", c.reference_refinement));
  c.validate();
  return c;
}

DiocotronConfig parse_diocotron(const json& j) {
  check_keys(j,
             {"kind", "name", "init", "n_particles", "grid", "eps", "sigma", "tau", "dt", "T", "b0", "charge_scale",
              "snapshot_times", "scheme", "poisson", "seed"},
             "diocotron config");
  DiocotronConfig c;
  c.name = text(j, "name", "custom");
  if (j.contains("init")) {
    const json& in = j.at("init");
    check_keys(in, {"r_minus", "r_plus", "alpha", "l", "sigma_v", "v_box"}, "init");
    c.init.r_minus = number(in, "r_minus", c.init.r_minus);
    c.init.r_plus = number(in, "r_plus", c.init.r_plus);
    c.init.alpha_pert = number(in, "alpha", c.init.alpha_pert);
    c.init.l_modes = static_cast<int>(integer(in, "l", c.init.l_modes));
    c.init.sigma_v = number(in, "sigma_v", c.init.sigma_v);
    c.init.v_box = number(in, "v_box", c.init.v_box);
  }
  const long long np = integer(j, "n_particles", static_cast<long long>(c.n_particles));
  if (np < 1) throw ConfigError("'n_particles' must be >= 1", "n_particles");
  c.n_particles = static_cast<std::size_t>(np);
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    check_keys(g, {"nx", "ny", "domain"}, "grid");
    c.nx = integer(g, "nx", c.nx);
    c.ny = integer(g, "ny", c.ny);
    if (g.contains("domain")) {
      const auto d = number_list(g, "domain");
      if (d.size() != 4) throw ConfigError("'domain' must be [xmin, xmax, ymin, ymax]", "domain");
      c.domain = {d[0], d[1], d[2], d[3]};
    }
  }
  c.eps = number(j, "eps", c.eps);
  c.sigma = number(j, "sigma", c.sigma);
  c.tau = number(j, "tau", c.tau);
  c.dt = number(j, "dt", c.dt);
  c.T = number(j, "T", c.T);
  c.b0 = number(j, "b0", c.b0);
  c.charge_scale = number(j, "charge_scale", c.charge_scale);
  if (j.contains("snapshot_times")) c.snapshot_times = number_list(j, "snapshot_times");
  c.scheme = choice(j, "scheme", Scheme::apsi1, kSchemes);
  if (j.contains("poisson")) {
    const json& p = j.at("poisson");
    check_keys(p, {"bc", "rho0_mode", "tol", "max_iter"}, "poisson");
    c.poisson.bc = choice(p, "bc", BoundaryCondition::dirichlet,
                          {{"dirichlet", BoundaryCondition::dirichlet}, {"periodic", BoundaryCondition::periodic}});
    c.poisson.rho0_mode = choice(p, "rho0_mode", BackgroundMode::spatial_mean,
                                 {{"zero", BackgroundMode::zero}, {"spatial-mean", BackgroundMode::spatial_mean}});
    c.poisson.tol = number(p, "tol", c.poisson.tol);
    c.poisson.max_iter = static_cast<int>(integer(p, "max_iter", c.poisson.max_iter));
  }
  c.seed = unsigned_integer(j, "seed", c.seed);
  c.validate();
  return c;
}

ExperimentConfig parse_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  const std::string kind = text(j, "kind", "");
  if (kind == "benchmark") return parse_benchmark(j);
  if (kind == "diocotron") return parse_diocotron(j);
  throw ConfigError("'kind' must be \"benchmark\" or \"diocotron\"", "kind");
}

std::vector<double> powers_of_two(int first, int last) {
  std::vector<double> out;
  for (int m = first; m <= last; ++m) out.push_back(std::ldexp(1.0, -m));
  return out;
}

std::vector<double> halvings(double base, int count) {
  std::vector<double> out;
  for (int m = 0; m < count; ++m) out.push_back(std::ldexp(base, -m));
  return out;
}

}  // namespace

void BenchmarkConfig::validate() const {
  if (eps_list.empty()) throw ConfigError("'eps_list' must not be empty", "eps_list");
  for (double e : eps_list)
    if (!(e > 0)) throw ConfigError("every eps must be > 0", "eps_list");
  if (dt_list.empty()) throw ConfigError("'dt' must not be empty", "dt");
  if (!(T > 0)) throw ConfigError("'T' must be > 0", "T");
  if (!(tau > 0)) throw ConfigError("'tau' must be > 0", "tau");
  if (!(sigma >= 0)) throw ConfigError("'sigma' must be >= 0", "sigma");
  if (n_paths < 1) throw ConfigError("'n_paths' must be >= 1", "n_paths");
  if (!x0.allFinite() || !v0.allFinite()) throw ConfigError("'x0'/'v0' must be finite", "x0");
  for (double dt : dt_list) {
    if (!(dt > 0)) throw ConfigError("every dt must be > 0", "dt");
    if (!nearly_integral(T / dt, 1e-9)) throw ConfigError("T/dt must be an integer (within 1e-9)", "dt");
  }
  if (study == Study::weak_order) {
    if (dt_list.size() < 3) throw ConfigError("weak-order study needs at least 3 time steps", "dt_list");
    if (reference_refinement < 1) throw ConfigError("'reference_refinement' must be >= 1", "reference_refinement");
    double dt_min = dt_list.front();
    for (double dt : dt_list) dt_min = std::min(dt_min, dt);
    const double n_ref = std::round(T / dt_min) * reference_refinement;
    for (double dt : dt_list)
      if (std::fmod(n_ref, std::round(T / dt)) != 0.0)
        throw ConfigError("every dt must be an integer multiple of the reference step", "dt_list");
  }
}

void DiocotronConfig::validate() const {
  init.validate();
  if (n_particles < 1) throw ConfigError("'n_particles' must be >= 1", "n_particles");
  if (nx < 3 || ny < 3) throw ConfigError("grid needs at least 3 nodes per axis", "grid");
  if (!(domain[1] > domain[0]) || !(domain[3] > domain[2])) throw ConfigError("'domain' bounds invalid", "domain");
  if (!(eps > 0)) throw ConfigError("'eps' must be > 0", "eps");
  if (!(tau > 0)) throw ConfigError("'tau' must be > 0", "tau");
  if (!(sigma >= 0)) throw ConfigError("'sigma' must be >= 0", "sigma");
  if (!(dt > 0)) throw ConfigError("'dt' must be > 0", "dt");
  if (!(T > 0)) throw ConfigError("'T' must be > 0", "T");
  if (b0 == 0) throw ConfigError("'b0' must be nonzero", "b0");
  if (!(charge_scale >= 0)) throw ConfigError("'charge_scale' must be >= 0", "charge_scale");
  if (!nearly_integral(T / dt, 1e-9)) throw ConfigError("T/dt must be an integer (within 1e-9)", "dt");
  for (double ts : snapshot_times) {
    if (ts < 0 || ts > T * (1 + 1e-12)) throw ConfigError("snapshot times must lie in [0, T]", "snapshot_times");
    if (!nearly_integral(ts / dt, 1e-6)) throw ConfigError("snapshot times must be multiples of dt", "snapshot_times");
  }
  try {
    poisson.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("poisson: ") + e.what(), e.field());
  }
}

ExperimentConfig parse_config_text(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, column = 1;
    const std::size_t upto = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, body.size());
    for (std::size_t k = 0; k < upto; ++k) {
      if (body[k] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::ostringstream msg;
    msg << "parse error at line " << line << ", column " << column << ": " << e.what();
    throw ConfigError(msg.str());
  }
  return parse_json(j);
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

json to_json(const BenchmarkConfig& c) {
  return json{{"kind", "benchmark"},
              {"name", c.name},
              {"study", to_string(c.study)},
              {"scheme", to_string(c.scheme)},
              {"eps_list", c.eps_list},
              {"dt_list", c.dt_list},
              {"T", c.T},
              {"sigma", c.sigma},
              {"tau", c.tau},
              {"x0", {c.x0.x(), c.x0.y()}},
              {"v0", {c.v0.x(), c.v0.y()}},
              {"v0_mode", to_string(c.v0_mode)},
              {"n_paths", c.n_paths},
              {"gc_model", to_string(c.gc_model)},
              {"seed", c.seed},
              {"reference_refinement", c.reference_refinement}};
}

json to_json(const DiocotronConfig& c) {
  return json{{"kind", "diocotron"},
              {"name", c.name},
              {"init",
               {{"r_minus", c.init.r_minus},
                {"r_plus", c.init.r_plus},
                {"alpha", c.init.alpha_pert},
                {"l", c.init.l_modes},
                {"sigma_v", c.init.sigma_v},
                {"v_box", c.init.v_box}}},
              {"n_particles", c.n_particles},
              {"grid", {{"nx", c.nx}, {"ny", c.ny}, {"domain", c.domain}}},
              {"eps", c.eps},
              {"sigma", c.sigma},
              {"tau", c.tau},
              {"dt", c.dt},
              {"T", c.T},
              {"b0", c.b0},
              {"charge_scale", c.charge_scale},
              {"snapshot_times", c.snapshot_times},
              {"scheme", to_string(c.scheme)},
              {"poisson",
               {{"bc", to_string(c.poisson.bc)},
                {"rho0_mode", to_string(c.poisson.rho0_mode)},
                {"tol", c.poisson.tol},
                {"max_iter", c.poisson.max_iter}}},
              {"seed", c.seed}};
}

json to_json(const ExperimentConfig& cfg) {
  return std::visit([](const auto& c) { return to_json(c); }, cfg);
}

std::vector<std::string> preset_names() {
  return {"fig1a", "fig1b", "fig1c", "fig1d", "fig2a", "fig2b", "fig2cd", "fig4a", "fig4b", "fig5a", "fig5b",
          "dio-eps2", "dio-eps4", "dio-collisional", "dio-collisional-eps4"};
}

ExperimentConfig preset(const std::string& name) {
  constexpr double pi = std::numbers::pi;
  auto benchmark = [&](Scheme scheme) {
    BenchmarkConfig c;
    c.name = name;
    c.scheme = scheme;
    c.gc_model = scheme == Scheme::apsi1 ? GcModel::r0_euler : GcModel::r0_si2;
    c.eps_list = powers_of_two(1, 10);
    c.dt_list = {pi / 30};
    c.T = pi;
    return c;
  };
  auto weak_order = [&](Scheme scheme, double eps, double dt0) {
    BenchmarkConfig c = benchmark(scheme);
    c.study = Study::weak_order;
    c.eps_list = {eps};
    c.dt_list = halvings(dt0, 5);
    c.n_paths = 10'000;
    return c;
  };
  auto diocotron = [&](double eps, double sigma, double tau, double T, double dt, std::vector<double> snaps) {
    DiocotronConfig c;
    c.name = name;
    c.eps = eps;
    c.sigma = sigma;
    c.tau = tau;
    c.T = T;
    c.dt = dt;
    c.snapshot_times = std::move(snaps);
    return c;
  };

  if (name == "fig1a") return benchmark(Scheme::apsi1);
  if (name == "fig1b") return benchmark(Scheme::apsi2);
  if (name == "fig1c" || name == "fig1d") {
    BenchmarkConfig c = benchmark(name == "fig1c" ? Scheme::apsi1 : Scheme::apsi2);
    c.sigma = std::ldexp(1.0, -6);
    c.tau = std::ldexp(1.0, 6);
    return c;
  }
  if (name == "fig2a" || name == "fig2b") {
    BenchmarkConfig c = benchmark(name == "fig2a" ? Scheme::apsi1 : Scheme::apsi2);
    c.study = Study::expectation;
    c.n_paths = 10'000;
    return c;
  }
  if (name == "fig2cd") {
    BenchmarkConfig c = benchmark(Scheme::apsi1);
    c.study = Study::expectation;
    c.n_paths = 10'000;
    c.x0 = {10, 14};
    c.v0_mode = V0Mode::order_epsilon;
    c.gc_model = GcModel::r_euler;
    c.eps_list = powers_of_two(1, 6);
    return c;
  }
  if (name == "fig4a") return weak_order(Scheme::apsi1, 1e-2, pi / 30);
  if (name == "fig4b") return weak_order(Scheme::apsi1, 1e-4, pi / 30);
  if (name == "fig5a" || name == "fig5b") {
    // The coarsest step 2 pi / 15 does not divide pi; run to 2 pi instead.
    BenchmarkConfig c = weak_order(Scheme::apsi2, name == "fig5a" ? 1e-6 : 1e-8, 2 * pi / 15);
    c.T = 2 * pi;
    return c;
  }
  if (name == "dio-eps2") return diocotron(1e-2, 1, 1, 20, 0.05, {5, 10, 15, 20});
  if (name == "dio-eps4") return diocotron(1e-4, 1, 1, 20, 0.05, {5, 10, 15, 20});
  if (name == "dio-collisional") return diocotron(1e-2, 1, 1e-2, 1, 0.01, {0.1, 0.3, 0.5, 1});
  if (name == "dio-collisional-eps4") return diocotron(1e-4, 1, 1e-2, 20, 0.05, {5, 10, 15, 20});
  throw ConfigError("unknown preset '" + name + "'", "preset");
}

}  // namespace apspic
