#include "tsm/surv_data.hpp"

#include <cmath>
#include <json.hpp>

namespace tsm {

void SurvDataset::add(double start, double stop, bool event,
                      std::span<const double> x, double weight) {
  if (x.size() != p_) {
    throw std::invalid_argument("covariate row has wrong length");
  }
  if (!(start < stop) || !std::isfinite(stop)) {
    throw std::invalid_argument("rows need start < stop < inf");
  }
  if (!(weight > 0.0) || !std::isfinite(weight)) {
    throw std::invalid_argument("weights must be finite and positive");
  }
  start_.push_back(start);
  stop_.push_back(stop);
  event_.push_back(event ? 1 : 0);
  weight_.push_back(weight);
  x_.insert(x_.end(), x.begin(), x.end());
}

void SurvDataset::reserve(std::size_t rows) {
  start_.reserve(rows);
  stop_.reserve(rows);
  event_.reserve(rows);
  weight_.reserve(rows);
  x_.reserve(rows * p_);
}

std::size_t SurvDataset::events() const {
  std::size_t d = 0;
  for (auto e : event_) d += e;
  return d;
}

std::string to_json(const FitResult& fit) {
  nlohmann::json j;
  j["beta"] = fit.beta;
  j["se"] = fit.se;
  j["loglik"] = fit.loglik;
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  j["info"] = fit.info;
  return j.dump();
}

}  // namespace tsm
