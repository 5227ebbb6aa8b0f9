#pragma once

#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tsm/simulation.hpp"

namespace tsm {

// Problem in a patient CSV; the message names the column or line.
class RecordsFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kRecordColumns =
    "id,arm,entry,time,event,crossed,cross_time,switched";

// arm is written as "treatment" / "control"; cross_time is empty when the
// patient did not cross.
void write_records_csv(std::ostream& out, std::span<const PatientRecord> records);
std::string records_csv(std::span<const PatientRecord> records);

// Columns may appear in any order; extra columns are ignored. admin_time is
// left at +inf (see set_admin_times).
std::vector<PatientRecord> read_records_csv(std::istream& in);

// admin_time = readout - entry for every record.
void set_admin_times(std::vector<PatientRecord>& records, double readout);

}  // namespace tsm
