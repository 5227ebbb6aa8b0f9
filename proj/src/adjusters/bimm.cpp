#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tsm/adjusters.hpp"

namespace tsm {

namespace {

CrossoverKind make_kind(const PiecewiseHazard& h, CrossoverType clock) {
  switch (clock) {
    case CrossoverType::Markov: return MarkovCrossover{h};
    case CrossoverType::SemiMarkov: return SemiMarkovCrossover{h};
    case CrossoverType::General: break;
  }
  throw std::invalid_argument("bimm supports Markov and semi-Markov clocks only");
}

struct Transformer {
  std::span<const PatientRecord> records;
  Ties ties;
  double clamp_at;
  int clamped = 0;
  std::vector<double> time;
  std::vector<int> event;

  Transformer(std::span<const PatientRecord> r, Ties t, double last_cut)
      : records(r), ties(t), clamp_at(last_cut), time(r.size()), event(r.size()) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      time[i] = r[i].time;
      event[i] = r[i].event;
    }
  }

  FitResult fit(const CrossoverKind& stay, const CrossoverKind& sw, double init) {
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& r = records[i];
      if (!r.switched) continue;
      double d;
      try {
        d = bimm_transform(stay, sw, r.cross_time, r.time - r.cross_time);
      } catch (const HorizonError&) {
        d = clamp_at;
        ++clamped;
      }
      time[i] = r.cross_time + d;
    }
    SurvDataset data(1);
    data.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
      const double x = records[i].arm == Arm::Treatment ? 1.0 : 0.0;
      data.add(0.0, time[i], event[i] != 0, std::span<const double>(&x, 1));
    }
    CoxOptions opts;
    opts.ties = ties;
    opts.init = {init};
    return cox_fit(data, opts);
  }
};

}  // namespace

double bimm_transform(const CrossoverKind& stay, const CrossoverKind& sw, double u,
                      double d_star) {
  if (d_star <= 0.0) return 0.0;
  const double q = post_crossover_survival(sw, u, u + d_star);
  if (!(q > 0.0)) throw HorizonError("mass beyond horizon");
  return post_crossover_time(stay, u, q) - u;
}

FitResult bimm_given(std::span<const PatientRecord> records, const PiecewiseHazard& lambda2,
                     const PiecewiseHazard& lambda2_star, CrossoverType clock, Ties ties) {
  Transformer tr(records, ties, lambda2.cuts().back());
  return tr.fit(make_kind(lambda2, clock), make_kind(lambda2_star, clock), 0.0);
}

FitResult bimm(std::span<const PatientRecord> records, const AdjusterConfig& cfg,
               std::uint64_t seed) {
  const auto& bc = cfg.bimm;
  const auto paths = control_paths(records, bc.clock);
  std::array<ExposureSummary, kPathCount> summary;
  for (int p = 0; p < kPathCount; ++p) summary[p] = summarize_exposure(paths[p], bc.cuts);
  Rng rng(seed);
  const PosteriorDraws draws = gamma_posterior_draws(summary, bc.cuts, bc.prior, bc.draws, rng);

  // With no progressed non-switchers the stay hazard is tied to the switch
  // hazard through the treatment effect itself.
  const bool fixed_point = paths[static_cast<int>(Path::Lambda2)].stop.empty();

  Transformer tr(records, cfg.ties, bc.cuts.back());
  double sum_b = 0.0, sum_b2 = 0.0, sum_v = 0.0;
  int ok = 0, failed = 0, not_converged = 0;
  long total_iter = 0;
  for (Eigen::Index k = 0; k < draws.draws(); ++k) {
    const PiecewiseHazard h2s = draws.hazard(Path::Lambda2Star, k);
    const CrossoverKind sw = make_kind(h2s, bc.clock);
    try {
      FitResult f;
      if (!fixed_point) {
        f = tr.fit(make_kind(draws.hazard(Path::Lambda2, k), bc.clock), sw, 0.0);
      } else {
        double beta = 0.0;
        bool done = false;
        // The map beta -> Cox estimate is deterministic, so an exact repeat
        // means the iteration is trapped in a cycle.
        std::vector<double> seen;
        for (int m = 0; m < bc.max_iter; ++m) {
          f = tr.fit(make_kind(h2s.scaled(std::exp(-beta)), bc.clock), sw, beta);
          ++total_iter;
          const double change = std::fabs(f.beta[0] - beta);
          beta = f.beta[0];
          if (change < bc.tol) {
            done = true;
            break;
          }
          if (std::find(seen.begin(), seen.end(), beta) != seen.end()) break;
          seen.push_back(beta);
        }
        if (!done) ++not_converged;
      }
      sum_b += f.beta[0];
      sum_b2 += f.beta[0] * f.beta[0];
      sum_v += f.se[0] * f.se[0];
      ++ok;
    } catch (const FitError&) {
      ++failed;
    }
  }
  if (ok == 0) throw FitError("bimm: every posterior draw failed");

  const double mean = sum_b / ok;
  const double between = ok > 1 ? std::max(0.0, (sum_b2 - ok * mean * mean) / (ok - 1)) : 0.0;
  FitResult out;
  out.beta = {mean};
  out.se = {std::sqrt(sum_v / ok + between)};
  out.iterations = ok;
  const double bad = static_cast<double>(failed + not_converged) / static_cast<double>(draws.draws());
  out.converged = bad <= 0.01;
  out.info["draws_ok"] = ok;
  out.info["draws_failed"] = failed;
  out.info["fixed_point"] = fixed_point ? 1.0 : 0.0;
  out.info["fixed_point_not_converged"] = not_converged;
  if (fixed_point) out.info["mean_fixed_point_iterations"] = static_cast<double>(total_iter) / ok;
  out.info["clamped_durations"] = tr.clamped;
  out.info["between_draw_variance"] = between;
  return out;
}

}  // namespace tsm
