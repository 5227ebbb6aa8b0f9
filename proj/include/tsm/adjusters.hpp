#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tsm/cox.hpp"
#include "tsm/posterior.hpp"
#include "tsm/simulation.hpp"
#include "tsm/surv_data.hpp"

namespace tsm {

enum class MethodId { ITT, CAS, EAS, TTDV, RPSFT, TSAFT, IPCW, BIMM };

inline constexpr std::array<MethodId, 8> kAllMethods = {
    MethodId::ITT,   MethodId::CAS,   MethodId::EAS,  MethodId::TTDV,
    MethodId::RPSFT, MethodId::TSAFT, MethodId::IPCW, MethodId::BIMM};

std::string_view method_name(MethodId m);
// Throws std::invalid_argument on an unknown name.
MethodId parse_method(std::string_view name);
// Comma-separated list or "all".
std::vector<MethodId> parse_methods(std::string_view list);

struct RpsftConfig {
  double phi_lo = -3.0;
  double phi_hi = 3.0;
  double tol = 1e-6;
  bool recensor = true;
  // recensor the control arm in the final Cox fit as well
  bool recensor_final = false;
};

struct TsaftConfig {
  int bootstrap = 200;
};

struct IpcwConfig {
  double cap = 10.0;
  // Period grid for the switching model; empty means the BIMM cuts.
  std::vector<double> periods;
};

struct BimmConfig {
  GammaPrior prior;
  int draws = 2000;
  double tol = 1e-6;
  int max_iter = 200;
  std::vector<double> cuts = {0.0, 1.0, 2.0, 3.0, 4.0};
  CrossoverType clock = CrossoverType::SemiMarkov;
};

struct AdjusterConfig {
  Ties ties = Ties::Efron;
  RpsftConfig rpsft;
  TsaftConfig tsaft;
  IpcwConfig ipcw;
  BimmConfig bimm;

  void validate() const;
};

// Cox on the arm indicator (treatment = 1) with one row per subject.
FitResult fit_arm_cox(std::span<const PatientRecord> records, std::span<const double> time,
                      std::span<const int> event, Ties ties = Ties::Efron);

FitResult itt(std::span<const PatientRecord> records, const AdjusterConfig& cfg = {});
FitResult cas(std::span<const PatientRecord> records, const AdjusterConfig& cfg = {});
FitResult eas(std::span<const PatientRecord> records, const AdjusterConfig& cfg = {});
FitResult ttdv(std::span<const PatientRecord> records, const AdjusterConfig& cfg = {});
SurvDataset ttdv_dataset(std::span<const PatientRecord> records);

struct Counterfactual {
  std::vector<double> time;
  std::vector<int> event;
};

// Untreated-scale times off + exp(-phi) * on, with optional recensoring at
// admin_time * min(1, exp(-phi)).
Counterfactual rpsft_counterfactual(std::span<const PatientRecord> records, double phi,
                                    bool recensor);
// Log-rank Z between arms on the counterfactual times.
double rpsft_z(std::span<const PatientRecord> records, double phi, bool recensor);
FitResult rpsft(std::span<const PatientRecord> records, const AdjusterConfig& cfg = {});

FitResult tsaft(std::span<const PatientRecord> records, const AdjusterConfig& cfg = {},
                std::uint64_t seed = 0);
// Stage-1 log acceleration factor of switching.
double tsaft_stage1(std::span<const PatientRecord> records);
// Switchers' post-crossover durations multiplied by exp(-phi2).
Counterfactual tsaft_counterfactual(std::span<const PatientRecord> records, double phi2);

// Cumulative inverse probability of remaining unswitched, one weight per
// record (1 for anyone who never carries a weight), capped at cfg.ipcw.cap.
std::vector<double> ipcw_weights(std::span<const PatientRecord> records,
                                 const AdjusterConfig& cfg, bool* used_fallback = nullptr);
FitResult ipcw(std::span<const PatientRecord> records, const AdjusterConfig& cfg = {});

// d = S2^{-1}(S2*(d*)) on the given clock for a switcher crossing at u.
double bimm_transform(const CrossoverKind& stay, const CrossoverKind& sw, double u,
                      double d_star);
FitResult bimm(std::span<const PatientRecord> records, const AdjusterConfig& cfg = {},
               std::uint64_t seed = 0);
// One BIMM pass with fixed hazards (no posterior sampling).
FitResult bimm_given(std::span<const PatientRecord> records, const PiecewiseHazard& lambda2,
                     const PiecewiseHazard& lambda2_star, CrossoverType clock,
                     Ties ties = Ties::Efron);

FitResult estimate(MethodId m, std::span<const PatientRecord> records,
                   const AdjusterConfig& cfg = {}, std::uint64_t seed = 0);

}  // namespace tsm
