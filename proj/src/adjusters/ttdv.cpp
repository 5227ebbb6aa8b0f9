#include "tsm/adjusters.hpp"

namespace tsm {

SurvDataset ttdv_dataset(std::span<const PatientRecord> records) {
  SurvDataset data(1);
  data.reserve(records.size() + records.size() / 2);
  const double on = 1.0, off = 0.0;
  const std::span<const double> x_on(&on, 1), x_off(&off, 1);
  for (const auto& r : records) {
    if (r.arm == Arm::Treatment) {
      data.add(0.0, r.time, r.event, x_on);
    } else if (r.switched) {
      data.add(0.0, r.cross_time, false, x_off);
      data.add(r.cross_time, r.time, r.event, x_on);
    } else {
      data.add(0.0, r.time, r.event, x_off);
    }
  }
  return data;
}

FitResult ttdv(std::span<const PatientRecord> records, const AdjusterConfig& cfg) {
  CoxOptions opts;
  opts.ties = cfg.ties;
  return cox_fit(ttdv_dataset(records), opts);
}

}  // namespace tsm
