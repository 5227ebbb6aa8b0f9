#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tsm {

// Counting-process survival data: one row per (start, stop] interval.
class SurvDataset {
 public:
  explicit SurvDataset(std::size_t n_covariates) : p_(n_covariates) {}

  void add(double start, double stop, bool event, std::span<const double> x,
           double weight = 1.0);
  void reserve(std::size_t rows);

  std::size_t size() const { return stop_.size(); }
  std::size_t covariates() const { return p_; }
  std::size_t events() const;

  double start(std::size_t i) const { return start_[i]; }
  double stop(std::size_t i) const { return stop_[i]; }
  bool event(std::size_t i) const { return event_[i] != 0; }
  double weight(std::size_t i) const { return weight_[i]; }
  double x(std::size_t i, std::size_t j) const { return x_[i * p_ + j]; }
  std::span<const double> row(std::size_t i) const {
    return {x_.data() + i * p_, p_};
  }

  const std::vector<double>& starts() const { return start_; }
  const std::vector<double>& stops() const { return stop_; }

 private:
  std::size_t p_;
  std::vector<double> start_, stop_, weight_, x_;
  std::vector<std::uint8_t> event_;
};

// Estimates on the log hazard ratio (or regression) scale.
struct FitResult {
  std::vector<double> beta;
  std::vector<double> se;
  double loglik = 0.0;
  bool converged = false;
  int iterations = 0;
  // Method-specific diagnostics (e.g. acceleration factor, failed draws).
  std::map<std::string, double> info;

  double ci_lower(std::size_t j = 0, double z = 1.959963984540054) const {
    return beta[j] - z * se[j];
  }
  double ci_upper(std::size_t j = 0, double z = 1.959963984540054) const {
    return beta[j] + z * se[j];
  }
};

std::string to_json(const FitResult& fit);

// Numerical failure inside a fitter.
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tsm
