#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pmf/errors.hpp"
#include "pmf/sfwm.hpp"

// CSV schemas shared between the CLI and the analysis modules. All numbers
// are written with shortest round-trip precision so reruns are
// byte-identical and downstream comparisons are exact.

namespace pmf {

inline std::string fmt(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

inline std::string fmt(std::uint64_t value) { return std::to_string(value); }

inline constexpr std::string_view kSpectrumHeader = "detuning_thz,f_hh,f_vv,f_hv,f_vh";
inline constexpr std::string_view kFringeHeader =
    "theta_s_deg,theta_i_deg,pulses,singles_s,singles_i,coincidences,accidentals_est";
inline constexpr std::string_view kFitReportHeader =
    "theta_s_deg,visibility,vis_stderr,phase_deg,mean_level,red_chisq";

// `# key = value` comment lines carrying the run parameters.
inline void write_comment_params(std::ostream& os,
                                 const std::vector<std::pair<std::string, std::string>>& params) {
    for (const auto& [key, value] : params) os << "# " << key << " = " << value << "\n";
}

inline void write_spectrum_csv(std::ostream& os, const PfsdSpectrum& spec,
                               const std::vector<std::pair<std::string, std::string>>& params) {
    write_comment_params(os, params);
    os << kSpectrumHeader << "\n";
    for (Eigen::Index k = 0; k < spec.grid.detuning_thz.size(); ++k) {
        os << fmt(spec.grid.detuning_thz[k]) << ',' << fmt(spec.f_hh[k]) << ','
           << fmt(spec.f_vv[k]) << ',' << fmt(spec.f_hv[k]) << ',' << fmt(spec.f_vh[k]) << "\n";
    }
}

struct FringeRow {
    double theta_s_deg = 0.0;
    double theta_i_deg = 0.0;
    std::uint64_t pulses = 0;
    std::uint64_t singles_s = 0;
    std::uint64_t singles_i = 0;
    std::uint64_t coincidences = 0;
    double accidentals_est = 0.0;
};

inline void write_fringe_row(std::ostream& os, const FringeRow& row) {
    os << fmt(row.theta_s_deg) << ',' << fmt(row.theta_i_deg) << ',' << fmt(row.pulses) << ','
       << fmt(row.singles_s) << ',' << fmt(row.singles_i) << ',' << fmt(row.coincidences) << ','
       << fmt(row.accidentals_est) << "\n";
}

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

inline double parse_double(const std::string& text, int line_no, int column) {
    const char* begin = text.data();
    const char* end = begin + text.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    double value = 0.0;
    const auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc{} || res.ptr != end)
        throw SchemaError("line " + std::to_string(line_no) + ", column " +
                          std::to_string(column) + ": not a number: '" + text + "'");
    return value;
}

inline std::uint64_t parse_count(const std::string& text, int line_no, int column) {
    const double value = parse_double(text, line_no, column);
    if (value < 0.0 || value != static_cast<double>(static_cast<std::uint64_t>(value)))
        throw SchemaError("line " + std::to_string(line_no) + ", column " +
                          std::to_string(column) + ": not a nonnegative count: '" + text + "'");
    return static_cast<std::uint64_t>(value);
}

} // namespace detail

// Reads the counting CSV schema. `#` lines are comments; the column header
// must match exactly.
inline std::vector<FringeRow> read_fringe_csv(std::istream& is) {
    std::vector<FringeRow> rows;
    std::string line;
    int line_no = 0;
    bool header_seen = false;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen) {
            if (line != kFringeHeader)
                throw SchemaError("line " + std::to_string(line_no) +
                                  ": expected header '" + std::string(kFringeHeader) +
                                  "', got '" + line + "'");
            header_seen = true;
            continue;
        }
        const auto fields = detail::split_fields(line);
        if (fields.size() != 7)
            throw SchemaError("line " + std::to_string(line_no) + ": expected 7 columns, got " +
                              std::to_string(fields.size()));
        FringeRow row;
        row.theta_s_deg = detail::parse_double(fields[0], line_no, 1);
        row.theta_i_deg = detail::parse_double(fields[1], line_no, 2);
        row.pulses = detail::parse_count(fields[2], line_no, 3);
        row.singles_s = detail::parse_count(fields[3], line_no, 4);
        row.singles_i = detail::parse_count(fields[4], line_no, 5);
        row.coincidences = detail::parse_count(fields[5], line_no, 6);
        row.accidentals_est = detail::parse_double(fields[6], line_no, 7);
        rows.push_back(row);
    }
    if (!header_seen)
        throw SchemaError("missing header line '" + std::string(kFringeHeader) + "'");
    return rows;
}

} // namespace pmf
