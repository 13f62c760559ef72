#include "fsfbm/mc.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>

#include "fsfbm/errors.hpp"
#include "fsfbm/io.hpp"
#include "fsfbm/parallel.hpp"
#include "fsfbm/rng.hpp"
#include "fsfbm/stats.hpp"

namespace fsfbm::mc {

void McConfig::validate() const {
  if (replicas == 0) throw ConfigError("McConfig: replicas must be positive");
  if (h_levels.empty()) throw ConfigError("McConfig: h_levels must be nonempty");
  for (std::size_t i = 1; i < h_levels.size(); ++i)
    if (!(h_levels[i] > h_levels[i - 1]))
      throw ConfigError("McConfig: h_levels must be strictly increasing");
  for (double h : h_levels)
    if (!(h > 0.0)) throw ConfigError("McConfig: h_levels must be positive");
  if (!(ci_level > 0.0) || !(ci_level < 1.0))
    throw ConfigError("McConfig: ci_level must lie in (0,1)");
}

nlohmann::json McConfig::to_json() const {
  return {{"replicas", replicas},
          {"master_seed", master_seed},
          {"grid", {{"t0", grid.t0}, {"dt", grid.dt}, {"n", grid.n}}},
          {"h_levels", h_levels},
          {"method", fbm::method_name(method)},
          {"ci_level", ci_level},
          {"spec_id", spec_id},
          {"parallel", parallel}};
}

namespace {

struct ReplicaFailure {
  std::atomic<bool> any{false};
  std::atomic<std::size_t> replica{0};
};

// Largest |xi_i| / sqrt(zeta(t_i, y_i)) over the grid (nodes i >= 1): the
// trajectory exits B(h) by t_end exactly when this ratio reaches h. One pass
// serves every level, which is what keeps the levels on common random numbers.
double sup_normalized_deviation(
    const sim::Trajectory& traj,
    const std::function<double(double, double)>& zeta_of_t_y) {
  double sup = 0.0;
  for (std::size_t i = 1; i < traj.x.size(); ++i) {
    const double z = zeta_of_t_y(traj.grid.node(i), traj.y[i]);
    sup = std::max(sup, std::abs(traj.xi[i]) / std::sqrt(z));
  }
  return sup;
}

}  // namespace

ExitEstimates estimate_exit_prob(
    const McConfig& cfg, const sim::SystemSpec& spec,
    const std::function<double(double, double)>& zeta_of_t_y, double x0, double y0,
    const sim::Reference& reference, const sim::IntegrateOptions& opt) {
  cfg.validate();
  fbm::Sampler sampler(cfg.grid, spec.hurst, cfg.method);
  const bool slow_noise =
      spec.time_form == sim::TimeForm::slow_time &&
      (spec.sigma2 > 0.0 || static_cast<bool>(spec.sigma2_fn));
  std::optional<fbm::Sampler> slow_sampler;
  if (slow_noise) slow_sampler.emplace(cfg.grid, spec.hurst2, cfg.method);

  std::vector<double> sup(cfg.replicas, 0.0);
  ReplicaFailure failure;

  parallel_for(
      cfg.replicas,
      [&](std::size_t r) {
        if (failure.any.load(std::memory_order_relaxed)) return;
        try {
          const fbm::FbmPath fast = sampler.sample(cfg.master_seed, r, 0);
          fbm::FbmPath slow;
          if (slow_noise) slow = slow_sampler->sample(cfg.master_seed, r, 1);
          const sim::Trajectory traj =
              sim::integrate(spec, fast, slow_noise ? &slow : nullptr, x0, y0,
                             reference, opt);
          sup[r] = sup_normalized_deviation(traj, zeta_of_t_y);
        } catch (const BlowUpError&) {
          failure.any.store(true);
          failure.replica.store(r);
        }
      },
      cfg.parallel);

  if (failure.any.load()) {
    const std::size_t r = failure.replica.load();
    throw BlowUpError("estimate_exit_prob: replica " + std::to_string(r) +
                          " blew up (sub-seed key " +
                          std::to_string(rng::stream_key(cfg.master_seed, r, 0)) + ")",
                      r);
  }

  ExitEstimates out;
  out.config = cfg;
  out.h_levels = cfg.h_levels;
  out.estimates.resize(cfg.h_levels.size());
  for (std::size_t li = 0; li < cfg.h_levels.size(); ++li) {
    std::size_t exits = 0;
    for (std::size_t r = 0; r < cfg.replicas; ++r)
      if (sup[r] >= cfg.h_levels[li]) ++exits;
    McEstimate est;
    est.replicas = cfg.replicas;
    est.exits = exits;
    est.p_hat = static_cast<double>(exits) / static_cast<double>(cfg.replicas);
    const auto ci = stats::wilson_interval(exits, cfg.replicas, cfg.ci_level);
    est.ci_low = ci.low;
    est.ci_high = ci.high;
    out.estimates[li] = est;
  }
  return out;
}

VarianceCurve estimate_variance_curve(
    const McConfig& cfg, const sim::SystemSpec& spec,
    const std::function<double(double, double)>& zeta_of_t_y,
    const std::function<double(double)>& relation_rhs, const std::vector<double>& times,
    double x0, double y0, const sim::Reference& reference,
    const sim::IntegrateOptions& opt) {
  cfg.validate();
  // map requested times to grid nodes
  std::vector<std::size_t> nodes;
  for (double t : times) {
    const double pos = (t - cfg.grid.t0) / cfg.grid.dt;
    const double rounded = std::round(pos);
    if (std::abs(pos - rounded) > 1e-9 || rounded < 0.0 ||
        rounded > static_cast<double>(cfg.grid.n))
      throw ConfigError("estimate_variance_curve: time " + std::to_string(t) +
                        " is not a grid node");
    nodes.push_back(static_cast<std::size_t>(rounded));
  }

  fbm::Sampler sampler(cfg.grid, spec.hurst, cfg.method);
  const bool slow_noise =
      spec.time_form == sim::TimeForm::slow_time &&
      (spec.sigma2 > 0.0 || static_cast<bool>(spec.sigma2_fn));
  std::optional<fbm::Sampler> slow_sampler;
  if (slow_noise) slow_sampler.emplace(cfg.grid, spec.hurst2, cfg.method);

  std::vector<double> samples(cfg.replicas * nodes.size());
  std::vector<double> ys(cfg.replicas * nodes.size());
  ReplicaFailure failure;
  parallel_for(
      cfg.replicas,
      [&](std::size_t r) {
        if (failure.any.load(std::memory_order_relaxed)) return;
        try {
          const fbm::FbmPath fast = sampler.sample(cfg.master_seed, r, 0);
          fbm::FbmPath slow;
          if (slow_noise) slow = slow_sampler->sample(cfg.master_seed, r, 1);
          const sim::Trajectory traj =
              sim::integrate(spec, fast, slow_noise ? &slow : nullptr, x0, y0,
                             reference, opt);
          for (std::size_t k = 0; k < nodes.size(); ++k) {
            samples[r * nodes.size() + k] = traj.xi[nodes[k]];
            ys[r * nodes.size() + k] = traj.y[nodes[k]];
          }
        } catch (const BlowUpError&) {
          failure.any.store(true);
          failure.replica.store(r);
        }
      },
      cfg.parallel);
  if (failure.any.load())
    throw BlowUpError("estimate_variance_curve: replica " +
                          std::to_string(failure.replica.load()) + " blew up",
                      failure.replica.load());

  VarianceCurve out;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    VarianceCurveRow row;
    row.t = cfg.grid.node(nodes[k]);
    // known-zero mean: xi starts on the reference
    double s2 = 0.0;
    double y_mean = 0.0;
    for (std::size_t r = 0; r < cfg.replicas; ++r) {
      const double v = samples[r * nodes.size() + k];
      s2 += v * v;
      y_mean += ys[r * nodes.size() + k];
    }
    const double n = static_cast<double>(cfg.replicas);
    row.var_empirical = nodes[k] == 0 ? 0.0 : s2 / n;
    row.std_error = row.var_empirical * std::sqrt(2.0 / n);
    row.zeta = zeta_of_t_y(row.t, y_mean / n);
    row.relation_rhs = relation_rhs ? relation_rhs(row.t) : 0.0;
    if (relation_rhs)
      row.flagged = std::abs(row.var_empirical - row.relation_rhs) >
                    4.0 * row.std_error + 0.05 * std::abs(row.relation_rhs);
    out.rows.push_back(row);
  }
  return out;
}

std::string dominance_status_name(DominanceStatus s) {
  switch (s) {
    case DominanceStatus::dominates: return "dominates";
    case DominanceStatus::consistent: return "consistent";
    case DominanceStatus::violated: return "violated";
    case DominanceStatus::vacuous: return "vacuous";
  }
  throw std::logic_error("dominance_status_name: bad status");
}

DominanceReport dominance_report(const ExitEstimates& estimates,
                                 const std::vector<bounds::BoundReport>& bound_set) {
  DominanceReport rep;
  for (const auto& bound : bound_set) {
    // match by deviation level
    std::size_t li = estimates.h_levels.size();
    for (std::size_t i = 0; i < estimates.h_levels.size(); ++i)
      if (std::abs(estimates.h_levels[i] - bound.inputs.h) <=
          1e-12 * std::max(1.0, std::abs(bound.inputs.h)))
        li = i;
    if (li == estimates.h_levels.size())
      throw ConfigError("dominance_report: bound level h = " +
                        std::to_string(bound.inputs.h) +
                        " has no matching estimate");
    const McEstimate& est = estimates.estimates[li];
    DominanceRow row;
    row.h = estimates.h_levels[li];
    row.formula_id = bound.formula_id;
    row.bound_value = bound.value;
    row.estimate = est;
    if (bound.vacuous)
      row.status = DominanceStatus::vacuous;
    else if (est.exits == 0)
      row.status = DominanceStatus::dominates;
    else if (est.ci_high <= bound.value)
      row.status = DominanceStatus::dominates;
    else if (est.ci_low > bound.value)
      row.status = DominanceStatus::violated;
    else
      row.status = DominanceStatus::consistent;
    if (row.status == DominanceStatus::violated) rep.failed = true;
    rep.rows.push_back(row);
  }
  return rep;
}

nlohmann::json ExitEstimates::to_json() const {
  nlohmann::json ests = nlohmann::json::array();
  for (std::size_t i = 0; i < h_levels.size(); ++i) {
    const auto& e = estimates[i];
    ests.push_back({{"h", h_levels[i]},
                    {"p_hat", e.p_hat},
                    {"ci", {e.ci_low, e.ci_high}},
                    {"exits", e.exits},
                    {"replicas", e.replicas}});
  }
  return {{"config", config.to_json()}, {"estimates", ests}};
}

std::string VarianceCurve::to_csv() const {
  io::CsvWriter csv({"t", "var_empirical", "std_error", "zeta", "relation_rhs",
                     "flagged"});
  for (const auto& r : rows)
    csv.row({r.t, r.var_empirical, r.std_error, r.zeta, r.relation_rhs,
             r.flagged ? 1.0 : 0.0});
  return csv.str();
}

nlohmann::json VarianceCurve::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows)
    arr.push_back({{"t", r.t},
                   {"var_empirical", r.var_empirical},
                   {"std_error", r.std_error},
                   {"zeta", r.zeta},
                   {"relation_rhs", r.relation_rhs},
                   {"flagged", r.flagged}});
  return arr;
}

nlohmann::json DominanceReport::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows)
    arr.push_back({{"h", r.h},
                   {"formula_id", bounds::formula_name(r.formula_id)},
                   {"bound_value", r.bound_value},
                   {"status", dominance_status_name(r.status)}});
  return {{"dominance", arr}, {"failed", failed}};
}

std::string DominanceReport::to_csv() const {
  io::CsvWriter csv({"h", "formula_id", "bound_value", "p_hat", "ci_low", "ci_high",
                     "exits", "replicas", "status"});
  for (const auto& r : rows) {
    csv.raw_row({io::format_double(r.h), bounds::formula_name(r.formula_id),
                 io::format_double(r.bound_value), io::format_double(r.estimate.p_hat),
                 io::format_double(r.estimate.ci_low),
                 io::format_double(r.estimate.ci_high),
                 std::to_string(r.estimate.exits), std::to_string(r.estimate.replicas),
                 dominance_status_name(r.status)});
  }
  return csv.str();
}

}  // namespace fsfbm::mc
