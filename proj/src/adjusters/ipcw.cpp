#include <algorithm>
#include <cmath>

#include <Eigen/Core>

#include "tsm/adjusters.hpp"
#include "tsm/logistic.hpp"

namespace tsm {

// Switching can only happen at the crossover event, so the person-periods at
// risk of switching are the periods in which control patients progress. The
// model for P(switch) has an intercept and the period index of progression.
std::vector<double> ipcw_weights(std::span<const PatientRecord> records,
                                 const AdjusterConfig& cfg, bool* used_fallback) {
  const auto& grid = cfg.ipcw.periods.empty() ? cfg.bimm.cuts : cfg.ipcw.periods;
  const PiecewiseHazard periods(grid, std::vector<double>(grid.size(), 0.0));

  std::vector<std::size_t> rows;
  std::vector<int> outcome;
  std::vector<double> period;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.arm != Arm::Control || !r.crossed) continue;
    rows.push_back(i);
    outcome.push_back(r.switched ? 1 : 0);
    period.push_back(static_cast<double>(periods.piece_index(r.cross_time)));
  }

  std::vector<double> weights(records.size(), 1.0);
  if (used_fallback) *used_fallback = false;
  if (rows.empty()) return weights;

  const bool varying = std::adjacent_find(period.begin(), period.end(),
                                          std::not_equal_to<>()) != period.end();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), varying ? 2 : 1);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    x(static_cast<Eigen::Index>(k), 0) = 1.0;
    if (varying) x(static_cast<Eigen::Index>(k), 1) = period[k];
  }

  std::vector<double> stay(rows.size());
  try {
    const FitResult fit = pooled_logistic_fit(outcome, x);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      double eta = fit.beta[0];
      if (varying) eta += fit.beta[1] * period[k];
      stay[k] = 1.0 - inv_logit(eta);
    }
  } catch (const FitError&) {
    // product-limit estimate of remaining unswitched within each period
    if (used_fallback) *used_fallback = true;
    const std::size_t J = grid.size();
    std::vector<double> at_risk(J, 0.0), stayed(J, 0.0);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const auto j = static_cast<std::size_t>(period[k]);
      at_risk[j] += 1.0;
      stayed[j] += outcome[k] ? 0.0 : 1.0;
    }
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const auto j = static_cast<std::size_t>(period[k]);
      stay[k] = stayed[j] / at_risk[j];
    }
  }
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (outcome[k]) continue;
    weights[rows[k]] = stay[k] > 1.0 / cfg.ipcw.cap ? 1.0 / stay[k] : cfg.ipcw.cap;
  }
  return weights;
}

FitResult ipcw(std::span<const PatientRecord> records, const AdjusterConfig& cfg) {
  bool fallback = false;
  const auto w = ipcw_weights(records, cfg, &fallback);
  SurvDataset data(1);
  data.reserve(records.size() + records.size() / 2);
  const double on = 1.0, off = 0.0;
  const std::span<const double> x_on(&on, 1), x_off(&off, 1);
  double max_w = 1.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.arm == Arm::Treatment) {
      data.add(0.0, r.time, r.event, x_on);
    } else if (r.switched) {
      data.add(0.0, r.cross_time, false, x_off);
    } else if (r.crossed) {
      data.add(0.0, r.cross_time, false, x_off);
      data.add(r.cross_time, r.time, r.event, x_off, w[i]);
      max_w = std::max(max_w, w[i]);
    } else {
      data.add(0.0, r.time, r.event, x_off);
    }
  }
  CoxOptions opts;
  opts.ties = cfg.ties;
  FitResult fit = cox_fit(data, opts);
  fit.info["logistic_fallback"] = fallback ? 1.0 : 0.0;
  fit.info["max_weight"] = max_w;
  return fit;
}

}  // namespace tsm
