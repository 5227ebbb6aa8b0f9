#include "tsm/hazard.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tsm {

PiecewiseHazard::PiecewiseHazard() : PiecewiseHazard({0.0}, {0.0}) {}

PiecewiseHazard::PiecewiseHazard(std::vector<double> cuts,
                                 std::vector<double> rates)
    : cuts_(std::move(cuts)), rates_(std::move(rates)) {
  if (cuts_.empty() || cuts_.size() != rates_.size()) {
    throw std::invalid_argument(
        "piecewise hazard needs one rate per cut (got " +
        std::to_string(cuts_.size()) + " cuts, " +
        std::to_string(rates_.size()) + " rates)");
  }
  if (cuts_[0] != 0.0) {
    throw std::invalid_argument("first cut must be 0");
  }
  for (std::size_t j = 1; j < cuts_.size(); ++j) {
    if (!(cuts_[j] > cuts_[j - 1]) || !std::isfinite(cuts_[j])) {
      throw std::invalid_argument("cuts must be finite and strictly increasing");
    }
  }
  for (double r : rates_) {
    if (!std::isfinite(r) || r < 0.0) {
      throw std::invalid_argument("rates must be finite and non-negative");
    }
  }
  cum_at_cut_.resize(cuts_.size());
  cum_at_cut_[0] = 0.0;
  for (std::size_t j = 1; j < cuts_.size(); ++j) {
    cum_at_cut_[j] = cum_at_cut_[j - 1] + rates_[j - 1] * (cuts_[j] - cuts_[j - 1]);
  }
}

PiecewiseHazard PiecewiseHazard::constant(double rate) {
  return PiecewiseHazard({0.0}, {rate});
}

PiecewiseHazard PiecewiseHazard::constant_on(std::span<const double> cuts,
                                             double rate) {
  return PiecewiseHazard(std::vector<double>(cuts.begin(), cuts.end()),
                         std::vector<double>(cuts.size(), rate));
}

std::size_t PiecewiseHazard::piece_index(double t) const {
  // first cut >= t, minus one: t in (s_j, s_{j+1}]
  auto it = std::lower_bound(cuts_.begin(), cuts_.end(), t);
  std::size_t j = static_cast<std::size_t>(it - cuts_.begin());
  return j == 0 ? 0 : j - 1;
}

double PiecewiseHazard::rate_at(double t) const { return rates_[piece_index(t)]; }

double PiecewiseHazard::cumulative(double t) const {
  if (t < 0.0) throw std::invalid_argument("time must be non-negative");
  if (t == kInfinity) return total_hazard();
  std::size_t j = piece_index(t);
  return cum_at_cut_[j] + rates_[j] * (t - cuts_[j]);
}

double PiecewiseHazard::survival(double t) const {
  return std::exp(-cumulative(t));
}

double PiecewiseHazard::total_hazard() const {
  return rates_.back() > 0.0 ? kInfinity : cum_at_cut_.back();
}

double PiecewiseHazard::inverse_survival(double p) const {
  if (!(p > 0.0) || p > 1.0) {
    throw std::invalid_argument("probability must lie in (0, 1]");
  }
  const double target = -std::log(p);
  auto it = std::lower_bound(cum_at_cut_.begin(), cum_at_cut_.end(), target);
  std::size_t j = static_cast<std::size_t>(it - cum_at_cut_.begin());
  if (j < cum_at_cut_.size() && cum_at_cut_[j] == target) return cuts_[j];
  if (j == cum_at_cut_.size()) {
    if (rates_.back() <= 0.0) {
      throw HorizonError("mass beyond horizon");
    }
    return cuts_.back() + (target - cum_at_cut_.back()) / rates_.back();
  }
  // target lies strictly inside piece j-1, whose rate is positive
  return cuts_[j - 1] + (target - cum_at_cut_[j - 1]) / rates_[j - 1];
}

double PiecewiseHazard::inverse_survival_or_inf(double p) const {
  if (-std::log(p) > total_hazard()) return kInfinity;
  return inverse_survival(p);
}

PiecewiseHazard PiecewiseHazard::scaled(double factor) const {
  std::vector<double> r = rates_;
  for (double& x : r) x *= factor;
  return PiecewiseHazard(cuts_, std::move(r));
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// int_u^t lambda(s | u) ds for the general kind, exact for grid-piecewise
// constant hazards.
double general_cumulative(const GeneralCrossover& g, double u, double t) {
  double total = 0.0;
  double a = u;
  auto it = std::upper_bound(g.grid.begin(), g.grid.end(), u);
  while (a < t) {
    double b = (it == g.grid.end()) ? t : std::min(*it, t);
    total += g.hazard(0.5 * (a + b), u) * (b - a);
    a = b;
    if (it != g.grid.end()) ++it;
  }
  return total;
}

double general_inverse(const GeneralCrossover& g, double u, double q) {
  double target = -std::log(q);
  double a = u;
  auto it = std::upper_bound(g.grid.begin(), g.grid.end(), u);
  while (true) {
    if (it == g.grid.end()) {
      double rate = g.hazard(a + 1.0, u);
      if (rate <= 0.0) throw HorizonError("mass beyond horizon");
      return a + target / rate;
    }
    double b = *it;
    double rate = g.hazard(0.5 * (a + b), u);
    double piece = rate * (b - a);
    if (piece >= target && rate > 0.0) return a + target / rate;
    target -= piece;
    a = b;
    ++it;
  }
}

double simpson_step(const std::function<double(double)>& f, double a, double b,
                    double fa, double fm, double fb, double whole, double tol,
                    int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double diff = left + right - whole;
  if (depth <= 0 || std::fabs(diff) <= 15.0 * tol) {
    return left + right + diff / 15.0;
  }
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double abs_tol, int max_depth) {
  if (!(b > a)) return 0.0;
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, b, fa, fm, fb, whole, abs_tol, max_depth);
}

double post_crossover_survival(const CrossoverKind& kind, double u, double t) {
  if (t <= u) return 1.0;
  return std::visit(
      overloaded{
          [&](const MarkovCrossover& m) {
            return std::exp(-(m.hazard.cumulative(t) - m.hazard.cumulative(u)));
          },
          [&](const SemiMarkovCrossover& s) { return s.hazard.survival(t - u); },
          [&](const GeneralCrossover& g) {
            return std::exp(-general_cumulative(g, u, t));
          }},
      kind);
}

double post_crossover_time(const CrossoverKind& kind, double u, double q) {
  return std::visit(
      overloaded{
          [&](const MarkovCrossover& m) {
            return m.hazard.inverse_survival(m.hazard.survival(u) * q);
          },
          [&](const SemiMarkovCrossover& s) {
            return u + s.hazard.inverse_survival(q);
          },
          [&](const GeneralCrossover& g) { return general_inverse(g, u, q); }},
      kind);
}

double marginal_survival(const PiecewiseHazard& lambda1,
                         const PiecewiseHazard& lambda3,
                         const CrossoverKind& kind, double t,
                         const MarginalOptions& opts) {
  if (t < 0.0) throw std::invalid_argument("time must be non-negative");
  const double direct = lambda1.survival(t) * lambda3.survival(t);
  if (t == 0.0) return 1.0;

  // Integrand kinks: hazard cuts in u, and for the semi-Markov kind the
  // points where t - u crosses a cut of the post-crossover hazard.
  std::vector<double> breaks{0.0, t};
  auto add_cuts = [&](const std::vector<double>& cuts) {
    for (double c : cuts) {
      if (c > 0.0 && c < t) breaks.push_back(c);
    }
  };
  add_cuts(lambda1.cuts());
  add_cuts(lambda3.cuts());
  std::visit(overloaded{[&](const MarkovCrossover& m) { add_cuts(m.hazard.cuts()); },
                        [&](const SemiMarkovCrossover& s) {
                          for (double c : s.hazard.cuts()) {
                            if (c > 0.0 && c < t) breaks.push_back(t - c);
                          }
                        },
                        [&](const GeneralCrossover& g) { add_cuts(g.grid); }},
             kind);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  // lambda3 is constant on each sub-interval; take it at the midpoint so the
  // (s_{j-1}, s_j] endpoint convention never picks the neighbouring piece.
  double through = 0.0;
  const double tol = opts.abs_tol / static_cast<double>(breaks.size() - 1);
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    double a = breaks[k], b = breaks[k + 1];
    double rate3 = lambda3.rate_at(0.5 * (a + b));
    if (rate3 == 0.0) continue;
    std::function<double(double)> piece = [&](double u) {
      return post_crossover_survival(kind, u, t) * rate3 * lambda1.survival(u) *
             lambda3.survival(u);
    };
    through += adaptive_simpson(piece, a, b, tol, opts.max_depth);
  }
  return std::clamp(direct + through, 0.0, 1.0);
}

DensityHazard marginal_density_and_hazard(const PiecewiseHazard& lambda1,
                                          const PiecewiseHazard& lambda3,
                                          const CrossoverKind& kind, double t) {
  MarginalOptions tight;
  tight.abs_tol = 1e-14;
  const double s = marginal_survival(lambda1, lambda3, kind, t, tight);
  if (s < 1e-12) throw std::domain_error("survival underflow");
  const double h = 1e-5 * std::max(1.0, t);
  double density;
  if (t >= h) {
    density = (marginal_survival(lambda1, lambda3, kind, t - h, tight) -
               marginal_survival(lambda1, lambda3, kind, t + h, tight)) /
              (2.0 * h);
  } else {
    density = (s - marginal_survival(lambda1, lambda3, kind, t + h, tight)) / h;
  }
  return {density, density / s};
}

}  // namespace tsm
