#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "abach/calib.hpp"
#include "abach/market.hpp"

namespace abach {

using Date = std::chrono::sys_days;

// Strict ISO-8601 calendar date (YYYY-MM-DD).
Date parse_date(const std::string& iso);
std::string format_date(Date d);

// ACT/365F day count; throws NegativeInterval when d2 precedes d1.
double year_fraction(Date d1, Date d2);

// Option-chain CSV. Columns, in order:
//   value_date,expiry,strike,call_mid,put_mid
// ISO dates, '.' decimal separator, empty field = missing side. A file holds
// one value date; rows missing both sides are rejected collectively, listed
// by row number. Expiries come back sorted by maturity.
MarketChain load_chain(const std::string& path);
void save_chain(const MarketChain& chain, const std::string& path);

// OIS CSV, columns: date,zero_rate (continuously compounded). Tenors are
// converted to ACT/365F year fractions against the given value date.
OisCurve load_ois(const std::string& path, Date value_date);
void save_ois(const OisCurve& curve, Date value_date, const std::string& path);

// Canonical (key-sorted, indented) JSON serialization; two saves of the same
// result are byte-identical, and NaN fields survive the round trip as null.
std::string result_to_json(const CalibrationResult& r);
CalibrationResult result_from_json(const std::string& text);
void save_result(const CalibrationResult& r, const std::string& path);
CalibrationResult load_result(const std::string& path);

// Directory of calibration results, one file per value date, append-only.
class ResultArchive {
public:
    explicit ResultArchive(std::string dir);  // creates the directory if absent

    void append(const CalibrationResult& r);  // IoError if the date is already archived
    CalibrationResult load(const std::string& value_date) const;
    std::vector<std::string> dates() const;  // ascending

private:
    std::string file_for(const std::string& value_date) const;
    std::string dir_;
};

}  // namespace abach
