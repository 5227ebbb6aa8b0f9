#include <algorithm>
#include <cmath>

#include <Eigen/Core>

#include "tsm/adjusters.hpp"
#include "tsm/weibull_aft.hpp"

namespace tsm {

double tsaft_stage1(std::span<const PatientRecord> records) {
  std::vector<double> dur;
  std::vector<int> event;
  std::vector<double> sw;
  int switchers = 0, stayers = 0;
  for (const auto& r : records) {
    if (r.arm != Arm::Control || !r.crossed) continue;
    dur.push_back(r.time - r.cross_time);
    event.push_back(r.event);
    sw.push_back(r.switched ? 1.0 : 0.0);
    (r.switched ? switchers : stayers)++;
  }
  if (switchers == 0) return 0.0;
  if (stayers == 0) throw FitError("stage-1 effect not identifiable");
  Eigen::MatrixXd z = Eigen::Map<const Eigen::VectorXd>(sw.data(), static_cast<Eigen::Index>(sw.size()));
  const auto fit = weibull_aft_fit(dur, event, z);
  if (!fit.fit.converged) throw FitError("stage-1 Weibull fit did not converge");
  return fit.fit.beta[0];
}

Counterfactual tsaft_counterfactual(std::span<const PatientRecord> records, double phi2) {
  Counterfactual cf{std::vector<double>(records.size()), std::vector<int>(records.size())};
  const double shrink = std::exp(-phi2);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    cf.time[i] = r.switched ? r.cross_time + shrink * (r.time - r.cross_time) : r.time;
    cf.event[i] = r.event;
  }
  return cf;
}

namespace {

FitResult tsaft_point(std::span<const PatientRecord> records, Ties ties, double* phi2) {
  *phi2 = tsaft_stage1(records);
  const auto cf = tsaft_counterfactual(records, *phi2);
  return fit_arm_cox(records, cf.time, cf.event, ties);
}

}  // namespace

FitResult tsaft(std::span<const PatientRecord> records, const AdjusterConfig& cfg,
                std::uint64_t seed) {
  double phi2 = 0.0;
  FitResult fit = tsaft_point(records, cfg.ties, &phi2);

  std::vector<std::size_t> treat, control;
  for (std::size_t i = 0; i < records.size(); ++i) {
    (records[i].arm == Arm::Treatment ? treat : control).push_back(i);
  }
  // resample patients within arm
  Rng rng(seed);
  std::vector<PatientRecord> sample(records.size());
  double sum = 0.0, sum_sq = 0.0;
  int ok = 0, failed = 0;
  for (int b = 0; b < cfg.tsaft.bootstrap; ++b) {
    std::size_t k = 0;
    for (std::size_t i = 0; i < treat.size(); ++i) sample[k++] = records[treat[rng.index(treat.size())]];
    for (std::size_t i = 0; i < control.size(); ++i) sample[k++] = records[control[rng.index(control.size())]];
    try {
      double unused = 0.0;
      const double beta = tsaft_point(sample, cfg.ties, &unused).beta[0];
      sum += beta;
      sum_sq += beta * beta;
      ++ok;
    } catch (const std::exception&) {
      ++failed;
    }
  }
  if (ok < 2) throw FitError("tsaft bootstrap failed");
  const double mean = sum / ok;
  fit.se[0] = std::sqrt(std::max(0.0, (sum_sq - ok * mean * mean) / (ok - 1)));
  fit.info["phi2"] = phi2;
  fit.info["bootstrap_ok"] = ok;
  fit.info["bootstrap_failures"] = failed;
  return fit;
}

}  // namespace tsm
