#include "fsfbm/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "fsfbm/bounds.hpp"
#include "fsfbm/errors.hpp"
#include "fsfbm/fbm.hpp"
#include "fsfbm/fou.hpp"
#include "fsfbm/io.hpp"
#include "fsfbm/manifold.hpp"
#include "fsfbm/mc.hpp"
#include "fsfbm/parallel.hpp"
#include "fsfbm/sim.hpp"
#include "fsfbm/stats.hpp"

namespace fsfbm::cli {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& path,
                const std::set<std::string>& required,
                const std::set<std::string>& optional) {
  if (!obj.is_object()) throw ConfigError(path + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (!required.count(key) && !optional.count(key))
      throw ConfigError(path + ": unknown key '" + key + "'");
  }
  for (const auto& key : required)
    if (!obj.contains(key))
      throw ConfigError(path + ": missing required key '" + key + "'");
}

double get_number(const json& obj, const std::string& path, const std::string& key) {
  if (!obj.contains(key)) throw ConfigError(path + ": missing required key '" + key + "'");
  if (!obj[key].is_number()) throw ConfigError(path + "." + key + ": expected a number");
  return obj[key].get<double>();
}

std::size_t get_size(const json& obj, const std::string& path, const std::string& key) {
  if (!obj.contains(key)) throw ConfigError(path + ": missing required key '" + key + "'");
  if (!obj[key].is_number_integer() ||
      (!obj[key].is_number_unsigned() && obj[key].get<long long>() < 0))
    throw ConfigError(path + "." + key + ": expected a nonnegative integer");
  return obj[key].get<std::size_t>();
}

HurstIndex get_hurst(const json& params, const std::string& path) {
  if (params.contains("brownian_limit") && params["brownian_limit"].get<bool>()) {
    if (params.contains("hurst") && params["hurst"].get<double>() != 0.5)
      throw ConfigError(path + ": brownian_limit requires hurst = 0.5 or omitted");
    return HurstIndex::brownian_limit();
  }
  return HurstIndex::checked(get_number(params, path, "hurst"));
}

TimeGrid get_grid(const json& params, const std::string& path) {
  if (!params.contains("grid")) throw ConfigError(path + ": missing required key 'grid'");
  const json& g = params["grid"];
  check_keys(g, path + ".grid", {"t0", "dt", "n"}, {});
  return TimeGrid(get_number(g, path + ".grid", "t0"), get_number(g, path + ".grid", "dt"),
                  get_size(g, path + ".grid", "n"));
}

Eigen::MatrixXd get_matrix(const json& obj, const std::string& path) {
  check_keys(obj, path, {"rows", "cols", "data"}, {});
  const auto rows = get_size(obj, path, "rows");
  const auto cols = get_size(obj, path, "cols");
  const auto& data = obj["data"];
  if (!data.is_array() || data.size() != rows * cols)
    throw ConfigError(path + ".data: expected " + std::to_string(rows * cols) +
                      " row-major entries");
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      m(i, j) = data[i * cols + j].get<double>();
  return m;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json data = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

std::string strip_extension(const std::string& path) {
  const auto pos = path.find_last_of('.');
  const auto slash = path.find_last_of('/');
  if (pos == std::string::npos || (slash != std::string::npos && pos < slash))
    return path;
  const std::string ext = path.substr(pos);
  if (ext == ".json" || ext == ".csv") return path.substr(0, pos);
  return path;
}

struct Artifacts {
  std::vector<std::string> files;
  void write(const std::string& path, const std::string& contents) {
    io::atomic_write(path, contents);
    files.push_back(path);
  }
};

// ---- command: sample ----

json cmd_sample(const json& params, std::uint64_t seed, const std::string& out,
                const std::string& format, Artifacts& art) {
  check_keys(params, "parameters",
             {"kind", "grid", "method"},
             {"hurst", "brownian_limit", "m"});
  const std::string kind = params["kind"].get<std::string>();
  const TimeGrid grid = get_grid(params, "parameters");
  const HurstIndex h = get_hurst(params, "parameters");
  const fbm::Method method = fbm::method_from_name(params["method"].get<std::string>());
  json result;
  if (kind == "fbm") {
    const fbm::FbmPath path = fbm::sample_path(grid, h, seed, method);
    art.write(out, format == "csv" ? path.to_csv() : path.to_json().dump(2) + "\n");
    result["nodes"] = path.values.size();
  } else if (kind == "mfbm") {
    const std::size_t m = get_size(params, "parameters", "m");
    const fbm::MultiFbmPath multi = fbm::sample_multi(m, grid, h, seed, method);
    art.write(out, format == "csv" ? multi.to_csv() : multi.to_json().dump(2) + "\n");
    result["nodes"] = grid.n + 1;
    result["components"] = m;
  } else {
    throw ConfigError("parameters.kind: expected 'fbm' or 'mfbm'");
  }
  return result;
}

// ---- command: zeta ----

json cmd_zeta(const json& params, const std::string& out, const std::string& format,
              Artifacts& art) {
  check_keys(params, "parameters", {"f_amp", "a"},
             {"hurst", "brownian_limit", "times"});
  const double a = get_number(params, "parameters", "a");
  const double f = get_number(params, "parameters", "f_amp");
  const HurstIndex h = get_hurst(params, "parameters");
  const double z = manifold::zeta_critical(0.0, [a](double) { return a; },
                                           [f](double) { return f; }, h);
  if (params.contains("times")) {
    // curve output (t, zeta); constant coefficients give a flat curve but the
    // column layout matches the general serialization
    const auto times = params["times"].get<std::vector<double>>();
    io::CsvWriter csv({"t", "zeta"});
    json arr = json::array();
    for (double t : times) {
      csv.row({t, z});
      arr.push_back({{"t", t}, {"zeta", z}});
    }
    art.write(out, format == "csv" ? csv.str() : arr.dump(2) + "\n");
    return {{"zeta", z}, {"points", times.size()}};
  }
  const json result{{"zeta", z}};
  if (format == "csv") {
    io::CsvWriter csv({"zeta"});
    csv.row({z});
    art.write(out, csv.str());
  } else {
    art.write(out, result.dump(2) + "\n");
  }
  return result;
}

// ---- command: fou ----

json cmd_fou(const json& params, const std::string& out, const std::string& format,
             Artifacts& art) {
  check_keys(params, "parameters",
             {"a", "f_amp", "eps", "sigma", "t_end", "times"},
             {"hurst", "brownian_limit", "w0", "rel_tol"});
  const double a = get_number(params, "parameters", "a");
  const double f = get_number(params, "parameters", "f_amp");
  const double eps = get_number(params, "parameters", "eps");
  const double sigma = get_number(params, "parameters", "sigma");
  const double t_end = get_number(params, "parameters", "t_end");
  const HurstIndex h = get_hurst(params, "parameters");
  const double w0 = params.value("w0", 0.0);
  const double rel_tol = params.value("rel_tol", 1e-6);
  std::vector<double> times = params["times"].get<std::vector<double>>();

  const auto coeffs = fou::LinearCoeffs::constant(a, f, eps, sigma, h);
  const auto alpha = fou::AlphaIntegral::from_constant(a);
  const auto ode = fou::variance_ode_solve(coeffs, alpha, t_end, w0);
  const auto zeta_fn = [a, f, h](double t) {
    return manifold::zeta_critical(t, [a](double) { return a; },
                                   [f](double) { return f; }, h);
  };

  io::CsvWriter csv({"t", "var_quadrature", "var_ode", "zeta", "relation_rhs"});
  json rows = json::array();
  for (double t : times) {
    const double vq = t == 0.0 ? 0.0 : fou::variance(t, coeffs, alpha, rel_tol);
    const double vo = sigma * sigma * ode(t);
    const double z = zeta_fn(t);
    const double rhs =
        sigma * sigma * (z - std::exp(2.0 * alpha(t, 0.0) / eps) * zeta_fn(0.0));
    csv.row({t, vq, vo, z, rhs});
    rows.push_back({{"t", t},
                    {"var_quadrature", vq},
                    {"var_ode", vo},
                    {"zeta", z},
                    {"relation_rhs", rhs}});
  }
  art.write(out, format == "csv" ? csv.str() : rows.dump(2) + "\n");
  return {{"rows", rows.size()}, {"ode_truncation_bound", ode.truncation_bound()}};
}

// ---- command: lyapunov ----

json cmd_lyapunov(const json& params, const std::string& out, Artifacts& art) {
  check_keys(params, "parameters", {"a_matrix"},
             {"c_matrix", "hurst", "brownian_limit"});
  const Eigen::MatrixXd a = get_matrix(params["a_matrix"], "parameters.a_matrix");
  json result;
  if (params.contains("c_matrix")) {
    const Eigen::MatrixXd c = get_matrix(params["c_matrix"], "parameters.c_matrix");
    const Eigen::MatrixXd x = manifold::lyapunov_solve(a, c);
    const double residual = (a * x + x * a.transpose() + c).norm();
    result = {{"x", matrix_json(x)}, {"residual_fro", residual}};
  } else {
    const HurstIndex h = get_hurst(params, "parameters");
    const auto md = manifold::md_critical_covariance(a, h);
    const double residual =
        (a * md.x_star + md.x_star * a.transpose() + md.q + md.q.transpose()).norm();
    result = {{"q", matrix_json(md.q)},
              {"x_star", matrix_json(md.x_star)},
              {"residual_fro", residual}};
    if (md.eigenvalues) {
      json d = json::array();
      for (Eigen::Index i = 0; i < md.eigenvalues->size(); ++i)
        d.push_back((*md.eigenvalues)(i));
      result["d_star"] = d;
    }
  }
  art.write(out, result.dump(2) + "\n");
  return result;
}

// ---- command: bounds ----

bounds::BoundInputs parse_bound_inputs(const json& params) {
  bounds::BoundInputs in;
  in.t = params.value("t", 0.0);
  in.h = params.value("h", 0.0);
  in.sigma = params.value("sigma", 0.0);
  in.eps = params.value("eps", 0.0);
  in.hurst = params.value("hurst", 0.0);
  in.alpha_t = params.value("alpha_t", 0.0);
  in.a_plus = params.value("a_plus", 0.0);
  in.m = params.value("m", std::size_t{1});
  in.f_plus = params.value("f_plus", 0.0);
  in.a_low = params.value("a_low", 0.0);
  in.big_m = params.value("big_m", 0.0);
  in.zeta_plus = params.value("zeta_plus", 0.0);
  in.zeta_minus = params.value("zeta_minus", 0.0);
  if (params.contains("k_const")) in.k_const = params["k_const"].get<double>();
  if (params.contains("lambda_weights"))
    in.lambda_weights = params["lambda_weights"].get<std::vector<double>>();
  in.md_alt_prefactor = params.value("md_alt_prefactor", false);
  return in;
}

bounds::BoundReport evaluate_bound(const std::string& formula,
                                   const bounds::BoundInputs& in,
                                   const std::vector<double>& d_star) {
  switch (bounds::formula_from_name(formula)) {
    case bounds::FormulaId::single_time: return bounds::single_time_bound(in.h, in.sigma);
    case bounds::FormulaId::bernstein:
      return bounds::bernstein_exit_bound(in.h, in.sigma * in.sigma);
    case bounds::FormulaId::variant1: return bounds::variant1_bound(in);
    case bounds::FormulaId::variant2: return bounds::variant2_bound(in);
    case bounds::FormulaId::nonlinear_variant1:
      return bounds::nonlinear_variant1_bound(in);
    case bounds::FormulaId::md_general: return bounds::md_general_bound(in, d_star);
    case bounds::FormulaId::md_symmetric: return bounds::md_symmetric_bound(in);
  }
  throw ConfigError("bounds: unknown formula " + formula);
}

json cmd_bounds(const json& params, const std::string& out, const std::string& format,
                Artifacts& art) {
  static const std::set<std::string> optional = {
      "t",    "h",     "sigma",     "eps",        "hurst",     "brownian_limit",
      "alpha_t","a_plus","m",        "f_plus",     "a_low",     "big_m",
      "zeta_plus", "zeta_minus", "k_const", "lambda_weights", "md_alt_prefactor",
      "d_star", "h_levels", "pilot"};
  check_keys(params, "parameters", {"formula"}, optional);
  const std::string formula = params["formula"].get<std::string>();
  std::vector<double> d_star;
  if (params.contains("d_star")) d_star = params["d_star"].get<std::vector<double>>();

  if (formula == "variant2_calibrate") {
    // smallest K making the variant-2 curve dominate a pilot run's Wilson
    // upper limits; an empirical calibration, not a theoretical constant
    check_keys(params["pilot"], "parameters.pilot",
               {"h_levels", "exits", "replicas", "ci_level"}, {});
    const auto h_levels = params["pilot"]["h_levels"].get<std::vector<double>>();
    const auto exits = params["pilot"]["exits"].get<std::vector<std::size_t>>();
    const auto replicas = params["pilot"]["replicas"].get<std::size_t>();
    const double ci = params["pilot"]["ci_level"].get<double>();
    if (h_levels.size() != exits.size())
      throw ConfigError("parameters.pilot: h_levels and exits must align");
    bounds::BoundInputs in = parse_bound_inputs(params);
    in.k_const = 1.0;
    double k_min = 0.0;
    for (std::size_t i = 0; i < h_levels.size(); ++i) {
      in.h = h_levels[i];
      const double unit = bounds::variant2_bound(in).value;
      const double upper = stats::wilson_interval(exits[i], replicas, ci).high;
      if (unit > 0.0) k_min = std::max(k_min, upper / unit);
    }
    json result{{"k_const", k_min},
                {"empirical_calibration", true},
                {"note", "fitted to a pilot run; not a theoretical constant"}};
    art.write(out, result.dump(2) + "\n");
    return result;
  }

  bounds::BoundInputs in = parse_bound_inputs(params);
  if (params.contains("h_levels")) {
    const auto levels = params["h_levels"].get<std::vector<double>>();
    io::CsvWriter csv({"h", "sigma", "eps", "t", "value", "vacuous"});
    json arr = json::array();
    for (double h : levels) {
      in.h = h;
      const auto rep = evaluate_bound(formula, in, d_star);
      csv.row({h, in.sigma, in.eps, in.t, rep.value, rep.vacuous ? 1.0 : 0.0});
      arr.push_back(rep.to_json());
    }
    art.write(out, format == "csv" ? csv.str() : arr.dump(2) + "\n");
    return {{"levels", levels.size()}};
  }
  const auto rep = evaluate_bound(formula, in, d_star);
  art.write(out, rep.to_json().dump(2) + "\n");
  return rep.to_json();
}

// ---- simulate / mc shared system construction ----

struct BuiltSystem {
  sim::SystemSpec spec;
  std::function<double(double, double)> zeta_of_t_y;
  std::function<double(double)> zeta_of_t;  // for relation curves
  double x0 = 0.0;
  double y0 = 0.0;
};

BuiltSystem build_linear_1d(const json& params) {
  const double a = get_number(params, "parameters", "a");
  const double f = get_number(params, "parameters", "f_amp");
  if (!(a < 0.0)) throw ConfigError("parameters.a: must be negative (stable case)");
  BuiltSystem sys;
  sim::SystemSpec& spec = sys.spec;
  spec.kind = sim::Kind::linear_1d;
  const double xs = params.value("x_star", 0.0);
  spec.f = [a, xs](double x, double, double) { return a * (x - xs); };
  spec.g = [](double, double, double) { return 1.0; };
  spec.f_amp = [f](double) { return f; };
  spec.eps = get_number(params, "parameters", "eps");
  spec.sigma = get_number(params, "parameters", "sigma");
  spec.hurst = get_hurst(params, "parameters");
  spec.hurst2 = spec.hurst;
  spec.a_lin = [a](double) { return a; };
  spec.x_star = [xs](double) { return xs; };
  spec.a_low = -a;
  const HurstIndex h = spec.hurst;
  const double z = manifold::zeta_critical(0.0, [a](double) { return a; },
                                           [f](double) { return f; }, h);
  sys.zeta_of_t_y = [z](double, double) { return z; };
  sys.zeta_of_t = [z](double) { return z; };
  sys.x0 = params.value("x0", xs);
  sys.y0 = params.value("y0", 0.0);
  return sys;
}

json cmd_simulate(const json& params, std::uint64_t seed, const std::string& out,
                  const std::string& format, Artifacts& art) {
  check_keys(params, "parameters",
             {"system", "grid", "a", "f_amp", "eps", "sigma"},
             {"hurst", "brownian_limit", "x_star", "x0", "y0", "h", "method",
              "cfl_factor"});
  const std::string system = params["system"].get<std::string>();
  if (system != "linear_1d")
    throw ConfigError("parameters.system: the simulate command supports 'linear_1d'; "
                      "use the climate command for the model presets");
  BuiltSystem sys = build_linear_1d(params);
  const TimeGrid grid = get_grid(params, "parameters");
  const fbm::Method method =
      fbm::method_from_name(params.value("method", std::string("circulant")));
  sim::IntegrateOptions opt;
  opt.cfl_factor = params.value("cfl_factor", 0.2);

  const fbm::FbmPath path = fbm::sample_path(grid, sys.spec.hurst, seed, method);
  const sim::Trajectory traj =
      sim::integrate(sys.spec, path, nullptr, sys.x0, sys.y0, nullptr, opt);

  json result{{"nodes", traj.y.size()}};
  if (params.contains("h")) {
    const double h = params["h"].get<double>();
    const auto rec = sim::detect_exit(traj, sys.zeta_of_t_y, h);
    std::vector<bool> inside(traj.y.size(), true);
    for (std::size_t i = 1; i < traj.y.size(); ++i)
      inside[i] = manifold::neighborhood_contains(
          traj.xi[i], sys.zeta_of_t_y(grid.node(i), traj.y[i]), h);
    art.write(out, sim::trajectory_csv(traj, &inside));
    json exit_json{{"exited", rec.exited}, {"h", rec.h}};
    if (rec.exited) {
      exit_json["tau_index"] = rec.tau_index;
      exit_json["tau_time"] = rec.tau_time;
    }
    art.write(out + ".exit.json", exit_json.dump(2) + "\n");
    result["exit"] = exit_json;
  } else {
    art.write(out, format == "csv" ? sim::trajectory_csv(traj)
                                   : json{{"x", traj.x}, {"y", traj.y}}.dump(2) + "\n");
  }
  return result;
}

// ---- command: mc ----

json cmd_mc(const json& params, std::uint64_t seed, const std::string& out,
            Artifacts& art) {
  check_keys(params, "parameters",
             {"system", "grid", "a", "f_amp", "eps", "sigma", "replicas", "h_levels"},
             {"hurst", "brownian_limit", "x_star", "x0", "y0", "ci_level", "method",
              "cfl_factor", "bound_set", "k_const", "big_m", "zeta_plus",
              "zeta_minus"});
  if (params["system"].get<std::string>() != "linear_1d")
    throw ConfigError("parameters.system: mc supports 'linear_1d'");
  BuiltSystem sys = build_linear_1d(params);

  mc::McConfig cfg;
  cfg.replicas = get_size(params, "parameters", "replicas");
  cfg.master_seed = seed;
  cfg.grid = get_grid(params, "parameters");
  cfg.h_levels = params["h_levels"].get<std::vector<double>>();
  cfg.ci_level = params.value("ci_level", 0.99);
  cfg.method = fbm::method_from_name(params.value("method", std::string("circulant")));
  cfg.spec_id = "linear_1d";

  sim::IntegrateOptions opt;
  opt.cfl_factor = params.value("cfl_factor", 0.2);

  const auto estimates =
      mc::estimate_exit_prob(cfg, sys.spec, sys.zeta_of_t_y, sys.x0, sys.y0, nullptr,
                             opt);

  std::vector<bounds::BoundReport> bound_set;
  if (params.contains("bound_set")) {
    const double t_end = cfg.grid.t_end();
    for (const auto& formula_json : params["bound_set"]) {
      const std::string formula = formula_json.get<std::string>();
      for (double h : cfg.h_levels) {
        bounds::BoundInputs in;
        in.t = t_end;
        in.h = h;
        in.sigma = sys.spec.sigma;
        in.eps = sys.spec.eps;
        in.hurst = sys.spec.hurst.value();
        in.alpha_t = sys.spec.a_low * t_end;
        in.a_plus = sys.spec.a_low;
        in.m = 1;
        in.f_plus = sys.spec.f_amp(0.0);
        in.a_low = sys.spec.a_low;
        in.big_m = params.value("big_m", 0.0);
        in.zeta_plus = params.value("zeta_plus", sys.zeta_of_t(0.0));
        in.zeta_minus = params.value("zeta_minus", sys.zeta_of_t(0.0));
        if (params.contains("k_const")) in.k_const = params["k_const"].get<double>();
        bound_set.push_back(evaluate_bound(formula, in, {}));
      }
    }
  }

  const auto dom = mc::dominance_report(estimates, bound_set);

  json bounds_json = json::array();
  for (const auto& b : bound_set)
    bounds_json.push_back({{"formula_id", bounds::formula_name(b.formula_id)},
                           {"h", b.inputs.h},
                           {"value", b.value},
                           {"vacuous", b.vacuous}});
  json report = estimates.to_json();
  report["bounds"] = bounds_json;
  report["dominance"] = dom.to_json()["dominance"];
  report["dominance_failed"] = dom.failed;

  const std::string base = strip_extension(out);
  art.write(base + ".json", report.dump(2) + "\n");
  art.write(base + ".csv", dom.to_csv());
  return {{"dominance_failed", dom.failed}, {"levels", cfg.h_levels.size()}};
}

// ---- command: climate ----

std::function<double(double)> parse_sigma2(const json& params, const std::string& path) {
  if (params.contains("sigma2") && params.contains("sigma2_periodic"))
    throw ConfigError(path + ": give either sigma2 or sigma2_periodic, not both");
  if (params.contains("sigma2")) {
    const double v = params["sigma2"].get<double>();
    return [v](double) { return v; };
  }
  if (params.contains("sigma2_periodic")) {
    const json& p = params["sigma2_periodic"];
    check_keys(p, path + ".sigma2_periodic", {"amplitude", "frequency", "offset"}, {});
    const double a = p["amplitude"].get<double>();
    const double f = p["frequency"].get<double>();
    const double o = p["offset"].get<double>();
    return [a, f, o](double t) { return a * std::sin(f * t) + o; };
  }
  throw ConfigError(path + ": missing sigma2 (number) or sigma2_periodic");
}

json cmd_climate(const json& params, std::uint64_t seed, const std::string& out_dir,
                 Artifacts& art) {
  check_keys(params, "parameters",
             {"preset", "grid", "eps", "h", "x0", "y0", "eta_sq"},
             {"hurst", "brownian_limit", "sigma1", "sigma2", "sigma2_periodic", "mu",
              "g_slow", "method", "cfl_factor"});
  const std::string preset = params["preset"].get<std::string>();
  const TimeGrid grid = get_grid(params, "parameters");
  const HurstIndex hurst = get_hurst(params, "parameters");
  const double eps = get_number(params, "parameters", "eps");
  const double h = get_number(params, "parameters", "h");
  const double eta_sq = get_number(params, "parameters", "eta_sq");
  const double x0 = get_number(params, "parameters", "x0");
  const double y0 = get_number(params, "parameters", "y0");
  const fbm::Method method =
      fbm::method_from_name(params.value("method", std::string("circulant")));
  sim::IntegrateOptions opt;
  opt.cfl_factor = params.value("cfl_factor", 0.2);

  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const auto in_dir = [&](const std::string& name) { return out_dir + "/" + name; };

  const double hg = hurst.value() * manifold::gamma_fn(2.0 * hurst.value());

  if (preset == "climate_full") {
    const double mu = get_number(params, "parameters", "mu");
    const double sigma1 = get_number(params, "parameters", "sigma1");
    const double sigma2 = params.value("sigma2", 0.0);
    const auto spec = sim::climate_full_preset(sigma1, sigma2, eps, hurst, mu, eta_sq);
    const auto det_spec = sim::climate_full_preset(0.0, 0.0, eps, hurst, mu, eta_sq);

    fbm::Sampler sampler(grid, hurst, method);
    const fbm::FbmPath fast = sampler.sample(seed, 0, 0);
    fbm::FbmPath slow;
    const bool has_slow = sigma2 > 0.0;
    if (has_slow) slow = sampler.sample(seed, 0, 1);

    const auto traj = sim::integrate(spec, fast, has_slow ? &slow : nullptr, x0, y0,
                                     nullptr, opt);
    const auto det = sim::integrate(det_spec, fast, nullptr, x0, y0, nullptr, opt);

    art.write(in_dir("trajectory.csv"), sim::trajectory_csv(traj));
    art.write(in_dir("deterministic.csv"), sim::trajectory_csv(det));

    io::CsvWriter manifold_csv({"t", "y_det", "x_star"});
    io::CsvWriter band_csv({"t", "lower", "upper"});
    const double half = h * std::sqrt(hg);
    for (std::size_t i = 0; i < det.y.size(); ++i) {
      const double t = grid.node(i);
      manifold_csv.row({t, det.y[i], 1.0});
      band_csv.row({t, 1.0 - half, 1.0 + half});
    }
    art.write(in_dir("manifold.csv"), manifold_csv.str());
    art.write(in_dir("band.csv"), band_csv.str());
    return {{"preset", preset}, {"band_halfwidth", half}};
  }

  if (preset == "climate_reduced") {
    const auto sigma2_fn = parse_sigma2(params, "parameters");
    std::function<double(double, double)> g_slow;
    if (!params.contains("g_slow"))
      throw ConfigError("parameters: climate_reduced requires g_slow");
    {
      const json& g = params["g_slow"];
      check_keys(g, "parameters.g_slow", {"kind"}, {"value"});
      const std::string gk = g["kind"].get<std::string>();
      if (gk == "constant") {
        const double v = g["value"].get<double>();
        g_slow = [v](double, double) { return v; };
      } else if (gk == "zero") {
        g_slow = [](double, double) { return 0.0; };
      } else {
        throw ConfigError("parameters.g_slow.kind: expected 'constant' or 'zero'");
      }
    }
    auto reduced = sim::climate_reduced_preset(sigma2_fn, eps, hurst, eta_sq, g_slow);

    auto det_spec = reduced.spec;
    det_spec.sigma2_fn = [](double) { return 0.0; };

    const fbm::FbmPath fast = fbm::sample_path(grid, hurst, seed, method);
    // reference: the stable branch continued from the initial state
    const auto ref = [&reduced, x0](double, double y) {
      return reduced.branch_solve(y, x0);
    };
    const auto traj =
        sim::integrate(reduced.spec, fast, nullptr, x0, y0, ref, opt);
    const auto det = sim::integrate(det_spec, fast, nullptr, x0, y0, ref, opt);
    art.write(in_dir("trajectory.csv"), sim::trajectory_csv(traj));
    art.write(in_dir("deterministic.csv"), sim::trajectory_csv(det));

    // backbone curve over the data range
    double x_lo = 1e300, x_hi = -1e300;
    for (double v : traj.x) {
      x_lo = std::min(x_lo, v);
      x_hi = std::max(x_hi, v);
    }
    x_lo = std::min(x_lo, -0.5);
    x_hi = std::max(x_hi, 2.5);
    io::CsvWriter manifold_csv({"x", "y_backbone", "stable"});
    const std::size_t samples = 400;
    for (std::size_t i = 0; i <= samples; ++i) {
      const double x = x_lo + (x_hi - x_lo) * double(i) / double(samples);
      manifold_csv.row({x, reduced.backbone(x),
                        reduced.stable_branch(x) ? 1.0 : 0.0});
    }
    art.write(in_dir("manifold.csv"), manifold_csv.str());

    io::CsvWriter band_csv({"t", "lower", "upper"});
    for (std::size_t i = 0; i < det.y.size(); ++i) {
      const double t = grid.node(i);
      const double xs = reduced.branch_solve(det.y[i], det.x[i]);
      const double a = std::abs(reduced.fast_jacobian(xs));
      const double zeta = hg / std::pow(a, 2.0 * hurst.value());
      const double half = h * std::sqrt(zeta);
      band_csv.row({t, xs - half, xs + half});
    }
    art.write(in_dir("band.csv"), band_csv.str());
    return {{"preset", preset}};
  }
  throw ConfigError("parameters.preset: expected 'climate_full' or 'climate_reduced'");
}

}  // namespace

RunResult run(const nlohmann::json& config, const RunOverrides& overrides) {
  RunResult result;
  try {
    check_keys(config, "config", {"parameters"}, {"command", "seed", "output"});
    std::string command = overrides.command;
    if (config.contains("command")) {
      const std::string cfg_cmd = config["command"].get<std::string>();
      if (command.empty())
        command = cfg_cmd;
      else if (command != cfg_cmd)
        throw ConfigError("config.command ('" + cfg_cmd +
                          "') does not match the invoked subcommand ('" + command +
                          "')");
    }
    if (command.empty()) throw ConfigError("config: no command given");

    // resolve seed: CLI flag > config > recorded random value
    std::uint64_t seed;
    if (overrides.seed) {
      seed = *overrides.seed;
    } else if (config.contains("seed")) {
      seed = config["seed"].get<std::uint64_t>();
    } else {
      std::random_device rd;
      seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    }

    std::string out;
    std::string format = "json";
    if (config.contains("output")) {
      check_keys(config["output"], "config.output", {"path"}, {"format"});
      out = config["output"]["path"].get<std::string>();
      format = config["output"].value("format", "json");
    }
    if (overrides.out) out = *overrides.out;
    if (overrides.format) format = *overrides.format;
    if (format != "json" && format != "csv")
      throw ConfigError("output.format: expected 'csv' or 'json'");
    if (out.empty()) throw ConfigError("config: no output path (config.output.path or --out)");

    // thread count: --threads wins; environment honored only when absent
    int threads = 0;
    if (overrides.threads) {
      threads = *overrides.threads;
    } else if (const char* env = std::getenv("FSFBM_THREADS")) {
      threads = std::atoi(env);
    }
    if (threads > 0) omp_set_num_threads(threads);

    json resolved = config;
    resolved["command"] = command;
    resolved["seed"] = seed;
    resolved.erase("output");
    const std::string hash = io::config_hash(resolved);

    const json& params = config["parameters"];
    Artifacts art;
    json outcome;
    if (command == "sample")
      outcome = cmd_sample(params, seed, out, format, art);
    else if (command == "zeta")
      outcome = cmd_zeta(params, out, format, art);
    else if (command == "fou")
      outcome = cmd_fou(params, out, format, art);
    else if (command == "lyapunov")
      outcome = cmd_lyapunov(params, out, art);
    else if (command == "bounds")
      outcome = cmd_bounds(params, out, format, art);
    else if (command == "simulate")
      outcome = cmd_simulate(params, seed, out, format, art);
    else if (command == "mc")
      outcome = cmd_mc(params, seed, out, art);
    else if (command == "climate")
      outcome = cmd_climate(params, seed, out, art);
    else
      throw ConfigError("unknown command: " + command);

    result.exit_code = 0;
    result.artifacts = art.files;
    result.echo = {{"config", resolved}, {"config_hash", hash}, {"result", outcome}};
    result.summary = command + ": wrote " + (art.files.empty() ? "(nothing)" : art.files.front()) +
                     (art.files.size() > 1
                          ? " (+" + std::to_string(art.files.size() - 1) + " more)"
                          : "") +
                     " config_hash=" + hash + " seed=" + std::to_string(seed);
  } catch (const ConfigError& e) {
    result.exit_code = 2;
    result.summary = std::string("configuration error: ") + e.what();
  } catch (const std::exception& e) {
    result.exit_code = 1;
    result.summary = std::string("error: ") + e.what();
  }
  return result;
}

RunResult run_file(const std::string& config_path, const RunOverrides& overrides) {
  std::ifstream in(config_path);
  if (!in) {
    RunResult r;
    r.exit_code = 2;
    r.summary = "configuration error: cannot open " + config_path;
    return r;
  }
  nlohmann::json config;
  try {
    in >> config;
  } catch (const std::exception& e) {
    RunResult r;
    r.exit_code = 2;
    r.summary = std::string("configuration error: invalid JSON: ") + e.what();
    return r;
  }
  return run(config, overrides);
}

}  // namespace fsfbm::cli
