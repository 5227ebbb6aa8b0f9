#include <algorithm>
#include <cmath>

#include "tsm/adjusters.hpp"
#include "tsm/km.hpp"

namespace tsm {

namespace {

std::vector<int> arm_groups(std::span<const PatientRecord> records) {
  std::vector<int> g(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) g[i] = records[i].arm == Arm::Treatment;
  return g;
}

}  // namespace

Counterfactual rpsft_counterfactual(std::span<const PatientRecord> records, double phi,
                                    bool recensor) {
  Counterfactual cf{std::vector<double>(records.size()), std::vector<int>(records.size())};
  const double shrink = std::exp(-phi);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    double off = r.time, on = 0.0;
    if (r.arm == Arm::Treatment) {
      off = 0.0;
      on = r.time;
    } else if (r.switched) {
      off = r.cross_time;
      on = r.time - r.cross_time;
    }
    double t = on > 0.0 ? off + shrink * on : off;
    int d = r.event;
    if (recensor && std::isfinite(r.admin_time)) {
      const double c = r.admin_time * std::min(1.0, shrink);
      if (t > c) {
        t = c;
        d = 0;
      }
    }
    cf.time[i] = t;
    cf.event[i] = d;
  }
  return cf;
}

double rpsft_z(std::span<const PatientRecord> records, double phi, bool recensor) {
  const auto cf = rpsft_counterfactual(records, phi, recensor);
  const auto groups = arm_groups(records);
  return logrank(cf.time, cf.event, groups).z;
}

FitResult rpsft(std::span<const PatientRecord> records, const AdjusterConfig& cfg) {
  const auto& rc = cfg.rpsft;
  double lo = rc.phi_lo, hi = rc.phi_hi;
  double z_lo = rpsft_z(records, lo, rc.recensor);
  double z_hi = rpsft_z(records, hi, rc.recensor);
  if (z_lo == 0.0) hi = lo;
  else if (z_hi == 0.0) lo = hi;
  else if ((z_lo < 0.0) == (z_hi < 0.0)) throw FitError("g-estimation root not bracketed");
  int steps = 0;
  while (hi - lo > rc.tol) {
    const double mid = 0.5 * (lo + hi);
    const double z = rpsft_z(records, mid, rc.recensor);
    ++steps;
    if (z == 0.0) {
      lo = hi = mid;
      break;
    }
    if ((z < 0.0) == (z_lo < 0.0)) {
      lo = mid;
      z_lo = z;
    } else {
      hi = mid;
    }
  }
  const double phi = 0.5 * (lo + hi);

  // observed treatment arm against the counterfactual control arm
  const auto cf = rpsft_counterfactual(records, phi, rc.recensor && rc.recensor_final);
  std::vector<double> time(records.size());
  std::vector<int> event(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].arm == Arm::Treatment) {
      time[i] = records[i].time;
      event[i] = records[i].event;
    } else {
      time[i] = cf.time[i];
      event[i] = cf.event[i];
    }
  }
  FitResult fit = fit_arm_cox(records, time, event, cfg.ties);

  std::vector<double> obs_time(records.size());
  std::vector<int> obs_event(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    obs_time[i] = records[i].time;
    obs_event[i] = records[i].event;
  }
  const double chi2_itt = logrank(obs_time, obs_event, arm_groups(records)).chi2;
  if (!(chi2_itt > 0.0)) throw FitError("ITT log-rank statistic is zero");
  fit.se[0] = std::fabs(fit.beta[0]) / std::sqrt(chi2_itt);
  fit.info["phi"] = phi;
  fit.info["acceleration"] = std::exp(phi);
  fit.info["bisection_steps"] = steps;
  fit.info["chi2_itt"] = chi2_itt;
  return fit;
}

}  // namespace tsm
