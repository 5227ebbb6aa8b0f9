#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <string>

#include "tsm/adjusters.hpp"

namespace tsm {

namespace {

constexpr std::array<std::string_view, 8> kNames = {"itt",   "cas",   "eas",  "ttdv",
                                                    "rpsft", "tsaft", "ipcw", "bimm"};

}  // namespace

std::string_view method_name(MethodId m) { return kNames[static_cast<std::size_t>(m)]; }

MethodId parse_method(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (lower == kNames[i]) return kAllMethods[i];
  }
  throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

std::vector<MethodId> parse_methods(std::string_view list) {
  if (list == "all") return {kAllMethods.begin(), kAllMethods.end()};
  std::vector<MethodId> out;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    const auto comma = list.find(',', pos);
    const auto end = comma == std::string_view::npos ? list.size() : comma;
    auto item = list.substr(pos, end - pos);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (item.empty()) throw std::invalid_argument("empty method name in list");
    const MethodId m = parse_method(item);
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

void AdjusterConfig::validate() const {
  if (!(rpsft.phi_lo < rpsft.phi_hi)) throw std::invalid_argument("rpsft: phi_lo must be < phi_hi");
  if (!(rpsft.tol > 0.0)) throw std::invalid_argument("rpsft: tolerance must be positive");
  if (tsaft.bootstrap < 2) throw std::invalid_argument("tsaft: need at least 2 bootstrap replicates");
  if (!(ipcw.cap >= 1.0)) throw std::invalid_argument("ipcw: cap must be >= 1");
  if (bimm.draws < 1) throw std::invalid_argument("bimm: draws must be >= 1");
  if (!(bimm.tol > 0.0)) throw std::invalid_argument("bimm: tolerance must be positive");
  if (bimm.max_iter < 1) throw std::invalid_argument("bimm: max_iter must be >= 1");
  if (!(bimm.prior.shape > 0.0 && bimm.prior.rate > 0.0)) {
    throw std::invalid_argument("bimm: prior parameters must be positive");
  }
  // PiecewiseHazard validates the grids
  PiecewiseHazard check(bimm.cuts, std::vector<double>(bimm.cuts.size(), 1.0));
  if (!ipcw.periods.empty()) {
    PiecewiseHazard p(ipcw.periods, std::vector<double>(ipcw.periods.size(), 1.0));
  }
}

FitResult fit_arm_cox(std::span<const PatientRecord> records, std::span<const double> time,
                      std::span<const int> event, Ties ties) {
  SurvDataset data(1);
  data.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const double x = records[i].arm == Arm::Treatment ? 1.0 : 0.0;
    data.add(0.0, time[i], event[i] != 0, std::span<const double>(&x, 1));
  }
  CoxOptions opts;
  opts.ties = ties;
  return cox_fit(data, opts);
}

FitResult itt(std::span<const PatientRecord> records, const AdjusterConfig& cfg) {
  std::vector<double> time(records.size());
  std::vector<int> event(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    time[i] = records[i].time;
    event[i] = records[i].event;
  }
  return fit_arm_cox(records, time, event, cfg.ties);
}

FitResult estimate(MethodId m, std::span<const PatientRecord> records,
                   const AdjusterConfig& cfg, std::uint64_t seed) {
  switch (m) {
    case MethodId::ITT: return itt(records, cfg);
    case MethodId::CAS: return cas(records, cfg);
    case MethodId::EAS: return eas(records, cfg);
    case MethodId::TTDV: return ttdv(records, cfg);
    case MethodId::RPSFT: return rpsft(records, cfg);
    case MethodId::TSAFT: return tsaft(records, cfg, seed);
    case MethodId::IPCW: return ipcw(records, cfg);
    case MethodId::BIMM: return bimm(records, cfg, seed);
  }
  throw std::logic_error("unhandled method");
}

}  // namespace tsm
