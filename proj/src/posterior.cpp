#include "tsm/posterior.hpp"

#include <algorithm>
#include <stdexcept>

namespace tsm {

ExposureSummary summarize_exposure(const PathData& data, std::span<const double> cuts) {
  if (cuts.empty() || cuts[0] != 0.0) throw std::invalid_argument("cuts must start at 0");
  const std::size_t J = cuts.size();
  ExposureSummary s{std::vector<double>(J, 0.0), std::vector<double>(J, 0.0)};
  for (std::size_t i = 0; i < data.stop.size(); ++i) {
    const double a = data.start[i], b = data.stop[i];
    if (!(b > a)) continue;
    for (std::size_t j = 0; j < J; ++j) {
      const double lo = cuts[j];
      const double hi = j + 1 < J ? cuts[j + 1] : kInfinity;
      if (hi <= a) continue;
      if (lo >= b) break;
      s.exposure[j] += std::min(b, hi) - std::max(a, lo);
      if (data.event[i] && b > lo && b <= hi) s.events[j] += 1.0;
    }
  }
  return s;
}

std::array<PathData, kPathCount> control_paths(std::span<const PatientRecord> records,
                                               CrossoverType clock) {
  std::array<PathData, kPathCount> out;
  for (const auto& r : records) {
    if (r.arm != Arm::Control) continue;
    const double first = r.crossed ? r.cross_time : r.time;
    out[static_cast<int>(Path::Lambda1)].add(0.0, first, r.event && !r.crossed);
    out[static_cast<int>(Path::Lambda3)].add(0.0, first, r.crossed);
    if (!r.crossed) continue;
    auto& post = out[static_cast<int>(r.switched ? Path::Lambda2Star : Path::Lambda2)];
    if (clock == CrossoverType::SemiMarkov) {
      post.add(0.0, r.time - r.cross_time, r.event);
    } else {
      post.add(r.cross_time, r.time, r.event);
    }
  }
  return out;
}

PiecewiseHazard PosteriorDraws::hazard(Path p, Eigen::Index k) const {
  const auto& m = rates[static_cast<int>(p)];
  std::vector<double> r(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index j = 0; j < m.cols(); ++j) r[static_cast<std::size_t>(j)] = m(k, j);
  return PiecewiseHazard(cuts, std::move(r));
}

PosteriorDraws gamma_posterior_draws(const std::array<ExposureSummary, kPathCount>& data,
                                     std::span<const double> cuts, GammaPrior prior,
                                     int K, Rng& rng) {
  if (K < 1) throw std::invalid_argument("K must be at least 1");
  if (!(prior.shape > 0.0) || !(prior.rate > 0.0)) {
    throw std::invalid_argument("gamma prior parameters must be positive");
  }
  const Eigen::Index J = static_cast<Eigen::Index>(cuts.size());
  PosteriorDraws out;
  out.cuts.assign(cuts.begin(), cuts.end());
  for (auto& m : out.rates) m.resize(K, J);
  for (int k = 0; k < K; ++k) {
    for (int p = 0; p < kPathCount; ++p) {
      const auto& s = data[static_cast<std::size_t>(p)];
      if (static_cast<Eigen::Index>(s.events.size()) != J) {
        throw std::invalid_argument("exposure summary does not match cuts");
      }
      for (Eigen::Index j = 0; j < J; ++j) {
        const auto jj = static_cast<std::size_t>(j);
        double v = rng.gamma(prior.shape + s.events[jj], prior.rate + s.exposure[jj]);
        // a draw can underflow to zero for tiny shapes
        out.rates[static_cast<std::size_t>(p)](k, j) = std::max(v, 1e-300);
      }
    }
  }
  return out;
}

}  // namespace tsm
