#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "tsm/hazard.hpp"
#include "tsm/rng.hpp"
#include "tsm/simulation.hpp"

namespace tsm {

// The four transitions of the control arm.
enum class Path : int { Lambda1 = 0, Lambda2 = 1, Lambda2Star = 2, Lambda3 = 3 };
inline constexpr int kPathCount = 4;

// At-risk intervals (start, stop] on a path's own clock.
struct PathData {
  std::vector<double> start;
  std::vector<double> stop;
  std::vector<int> event;

  void add(double a, double b, bool d) {
    start.push_back(a);
    stop.push_back(b);
    event.push_back(d ? 1 : 0);
  }
};

// Event counts d_j and exposures E_j per cut interval.
struct ExposureSummary {
  std::vector<double> events;
  std::vector<double> exposure;
};

ExposureSummary summarize_exposure(const PathData& data, std::span<const double> cuts);

// Splits control-arm records into the four path datasets. The post-crossover
// paths use time since crossover for semi-Markov, time since entry otherwise.
std::array<PathData, kPathCount> control_paths(std::span<const PatientRecord> records,
                                               CrossoverType clock);

struct GammaPrior {
  double shape = 1.0;
  double rate = 2.0;
};

struct PosteriorDraws {
  std::vector<double> cuts;
  // K x J sampled rates, indexed by Path.
  std::array<Eigen::MatrixXd, kPathCount> rates;

  Eigen::Index draws() const { return rates[0].rows(); }
  PiecewiseHazard hazard(Path p, Eigen::Index k) const;
};

// K independent draws from the product-Gamma posterior
// xi_j ~ Gamma(a + d_j, b + E_j).
PosteriorDraws gamma_posterior_draws(const std::array<ExposureSummary, kPathCount>& data,
                                     std::span<const double> cuts, GammaPrior prior,
                                     int K, Rng& rng);

}  // namespace tsm
