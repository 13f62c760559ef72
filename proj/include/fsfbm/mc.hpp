#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fsfbm/bounds.hpp"
#include "fsfbm/fbm.hpp"
#include "fsfbm/sim.hpp"
#include "fsfbm/time_grid.hpp"

#include "json.hpp"

namespace fsfbm::mc {

struct McConfig {
  std::size_t replicas = 0;
  std::uint64_t master_seed = 0;
  TimeGrid grid;
  std::vector<double> h_levels;  // strictly increasing
  fbm::Method method = fbm::Method::circulant;
  double ci_level = 0.99;
  std::string spec_id;
  bool parallel = true;  // serial reference path used when false

  void validate() const;
  nlohmann::json to_json() const;
};

struct McEstimate {
  double p_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  std::size_t replicas = 0;
  std::size_t exits = 0;
};

struct ExitEstimates {
  McConfig config;
  std::vector<double> h_levels;
  std::vector<McEstimate> estimates;  // one per level, common random numbers

  nlohmann::json to_json() const;
};

// Runs `replicas` trajectories (replica r drawn from the (master_seed, r)
// stream), applies exit detection at every level on the same paths, and
// returns Wilson intervals. A replica that blows up fails the whole run with
// the offending sub-seed in the message.
ExitEstimates estimate_exit_prob(
    const McConfig& cfg, const sim::SystemSpec& spec,
    const std::function<double(double, double)>& zeta_of_t_y, double x0, double y0,
    const sim::Reference& reference = nullptr,
    const sim::IntegrateOptions& opt = {});

struct VarianceCurveRow {
  double t = 0.0;
  double var_empirical = 0.0;
  double std_error = 0.0;
  double zeta = 0.0;
  double relation_rhs = 0.0;
  bool flagged = false;
};

struct VarianceCurve {
  std::vector<VarianceCurveRow> rows;
  std::string to_csv() const;
  nlohmann::json to_json() const;
};

// Empirical Var(xi_t) at the requested grid times against the model curve;
// flags rows where |empirical - rhs| > 4 SE + 5% of the model value.
VarianceCurve estimate_variance_curve(
    const McConfig& cfg, const sim::SystemSpec& spec,
    const std::function<double(double, double)>& zeta_of_t_y,
    const std::function<double(double)>& relation_rhs, const std::vector<double>& times,
    double x0, double y0, const sim::Reference& reference = nullptr,
    const sim::IntegrateOptions& opt = {});

enum class DominanceStatus { dominates, consistent, violated, vacuous };

std::string dominance_status_name(DominanceStatus s);

struct DominanceRow {
  double h = 0.0;
  bounds::FormulaId formula_id = bounds::FormulaId::variant1;
  double bound_value = 0.0;
  DominanceStatus status = DominanceStatus::consistent;
  McEstimate estimate;
};

struct DominanceReport {
  std::vector<DominanceRow> rows;
  bool failed = false;  // true when any row is violated

  nlohmann::json to_json() const;
  std::string to_csv() const;
};

// Per (h, bound) status:
//   vacuous     bound >= 1
//   dominates   zero exits, or ci_high <= bound
//   violated    ci_low > bound
//   consistent  otherwise
DominanceReport dominance_report(const ExitEstimates& estimates,
                                 const std::vector<bounds::BoundReport>& bound_set);

}  // namespace fsfbm::mc
