#include "tsm/records_io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

namespace tsm {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\r')) cell.pop_back();
    std::size_t b = 0;
    while (b < cell.size() && cell[b] == ' ') ++b;
    out.push_back(cell.substr(b));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& column, std::size_t line) {
  if (s == "inf" || s == "Inf" || s == "NA" || s.empty()) return kInfinity;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw RecordsFormatError(fmt::format("line {}: column '{}': '{}' is not a number", line,
                                         column, s));
  }
  return v;
}

bool parse_bool(const std::string& s, const std::string& column, std::size_t line) {
  if (s == "1" || s == "true" || s == "TRUE") return true;
  if (s == "0" || s == "false" || s == "FALSE") return false;
  throw RecordsFormatError(fmt::format("line {}: column '{}': '{}' is not 0/1", line, column, s));
}

}  // namespace

void write_records_csv(std::ostream& out, std::span<const PatientRecord> records) {
  out << kRecordColumns << '\n';
  for (const auto& r : records) {
    out << fmt::format("{},{},{},{},{},{},{},{}\n", r.id,
                       r.arm == Arm::Treatment ? "treatment" : "control", r.entry, r.time,
                       r.event ? 1 : 0, r.crossed ? 1 : 0,
                       r.crossed ? fmt::format("{}", r.cross_time) : std::string(),
                       r.switched ? 1 : 0);
  }
}

std::string records_csv(std::span<const PatientRecord> records) {
  std::ostringstream ss;
  write_records_csv(ss, records);
  return ss.str();
}

std::vector<PatientRecord> read_records_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw RecordsFormatError("empty input: missing header");
  const auto header = split(line);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < header.size(); ++i) index[header[i]] = i;
  constexpr std::array<const char*, 8> required = {"id",      "arm",        "entry",   "time",
                                                   "event",   "crossed",    "cross_time",
                                                   "switched"};
  for (const char* c : required) {
    if (!index.count(c)) throw RecordsFormatError(fmt::format("missing column '{}'", c));
  }

  std::vector<PatientRecord> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    if (cells.size() < header.size()) {
      throw RecordsFormatError(fmt::format("line {}: expected {} fields, found {}", lineno,
                                           header.size(), cells.size()));
    }
    auto cell = [&](const char* c) -> const std::string& { return cells[index.at(c)]; };
    PatientRecord r;
    const double id = parse_double(cell("id"), "id", lineno);
    if (!std::isfinite(id) || id != std::floor(id)) {
      throw RecordsFormatError(fmt::format("line {}: column 'id': expected an integer", lineno));
    }
    r.id = static_cast<int>(id);
    const auto& arm = cell("arm");
    if (arm == "treatment" || arm == "1") r.arm = Arm::Treatment;
    else if (arm == "control" || arm == "0") r.arm = Arm::Control;
    else throw RecordsFormatError(fmt::format("line {}: column 'arm': '{}'", lineno, arm));
    r.entry = parse_double(cell("entry"), "entry", lineno);
    r.time = parse_double(cell("time"), "time", lineno);
    if (!(r.time > 0.0) || !std::isfinite(r.time)) {
      throw RecordsFormatError(fmt::format("line {}: column 'time' must be positive", lineno));
    }
    r.event = parse_bool(cell("event"), "event", lineno);
    r.crossed = parse_bool(cell("crossed"), "crossed", lineno);
    r.switched = parse_bool(cell("switched"), "switched", lineno);
    if (r.crossed) {
      r.cross_time = parse_double(cell("cross_time"), "cross_time", lineno);
      if (!(r.cross_time >= 0.0 && r.cross_time < r.time)) {
        throw RecordsFormatError(
            fmt::format("line {}: column 'cross_time' must lie in [0, time)", lineno));
      }
    }
    if (r.switched && !r.crossed) {
      throw RecordsFormatError(fmt::format("line {}: switched without crossing", lineno));
    }
    out.push_back(r);
  }
  return out;
}

void set_admin_times(std::vector<PatientRecord>& records, double readout) {
  for (auto& r : records) r.admin_time = readout - r.entry;
}

}  // namespace tsm
