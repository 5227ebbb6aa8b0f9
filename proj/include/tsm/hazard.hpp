#pragma once

#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

namespace tsm {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Raised when a survival probability cannot be reached because the hazard
// integrates to a finite total.
class HorizonError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Step-function hazard on (s_{j-1}, s_j]; the last piece extends to +inf.
class PiecewiseHazard {
 public:
  PiecewiseHazard();
  PiecewiseHazard(std::vector<double> cuts, std::vector<double> rates);

  static PiecewiseHazard constant(double rate);
  // Same rate on every piece of the given grid.
  static PiecewiseHazard constant_on(std::span<const double> cuts, double rate);

  const std::vector<double>& cuts() const { return cuts_; }
  const std::vector<double>& rates() const { return rates_; }
  std::size_t pieces() const { return rates_.size(); }

  // Index j of the piece (s_j, s_{j+1}] containing t; t = 0 maps to piece 0.
  std::size_t piece_index(double t) const;
  double rate_at(double t) const;

  double cumulative(double t) const;
  double survival(double t) const;
  // Smallest t with survival(t) <= p. Throws HorizonError when -log(p)
  // exceeds the total cumulative hazard.
  double inverse_survival(double p) const;
  // Like inverse_survival but returns +inf instead of throwing.
  double inverse_survival_or_inf(double p) const;
  double total_hazard() const;

  PiecewiseHazard scaled(double factor) const;

  friend bool operator==(const PiecewiseHazard&, const PiecewiseHazard&) = default;

 private:
  std::vector<double> cuts_;
  std::vector<double> rates_;
  std::vector<double> cum_at_cut_;
};

// Post-crossover hazard indexed by time since entry.
struct MarkovCrossover {
  PiecewiseHazard hazard;
};

// Post-crossover hazard indexed by time since crossover.
struct SemiMarkovCrossover {
  PiecewiseHazard hazard;
};

// Bivariate post-crossover hazard lambda(t | u) for t > u, piecewise constant
// in both arguments on `grid`.
struct GeneralCrossover {
  std::vector<double> grid;
  std::function<double(double t, double u)> hazard;
};

using CrossoverKind =
    std::variant<MarkovCrossover, SemiMarkovCrossover, GeneralCrossover>;

// exp{-int_u^t lambda_2(s | u) ds} for t >= u.
double post_crossover_survival(const CrossoverKind& kind, double u, double t);

// Absolute time T > u at which the post-crossover survival from u equals q.
double post_crossover_time(const CrossoverKind& kind, double u, double q);

struct MarginalOptions {
  double abs_tol = 1e-10;
  int max_depth = 48;
};

// Marginal survival of the event time in the three-state model.
double marginal_survival(const PiecewiseHazard& lambda1,
                         const PiecewiseHazard& lambda3,
                         const CrossoverKind& kind, double t,
                         const MarginalOptions& opts = {});

struct DensityHazard {
  double density;
  double hazard;
};

// Numerical density (central difference of the marginal survival) and hazard.
DensityHazard marginal_density_and_hazard(const PiecewiseHazard& lambda1,
                                          const PiecewiseHazard& lambda3,
                                          const CrossoverKind& kind, double t);

// Adaptive Simpson on [a, b]; exposed for reuse and testing.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double abs_tol, int max_depth);

}  // namespace tsm
