#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "spn/diagnostics.hpp"
#include "spn/simulator.hpp"

namespace spn::cli {

// Structured text: `key = value` lines, optional `[section]` headers.
class Report {
public:
    void add(const std::string& key, const std::string& value);
    void add(const std::string& key, const char* value) { add(key, std::string(value)); }
    void add(const std::string& key, double value);
    void add(const std::string& key, bool value);
    void add(const std::string& key, int value);
    void add(const std::string& key, long value) { add_raw(key, std::to_string(value)); }
    void add(const std::string& key, unsigned long value) { add_raw(key, std::to_string(value)); }
    void add(const std::string& key, unsigned long long value) { add_raw(key, std::to_string(value)); }
    void section(const std::string& name);

    std::string str() const;

private:
    void add_raw(const std::string& key, std::string value);
    std::vector<std::pair<std::string, std::string>> lines_;  // empty key: section header
};

enum class TableFormat { Csv, Tsv };

char separator(TableFormat format);
std::string extension(TableFormat format);

// t,norm,Q_1..Q_I,V_1..V_I[,Q_i_c...][,extra]
void write_trajectory(std::ostream& os, const Trajectory& traj, TableFormat format);

// Accepts files written by write_trajectory. Counter detail columns are
// skipped; time_avg_norm is the trapezoid average of the samples.
Trajectory read_trajectory(std::istream& is, TableFormat format);

void write_drift_bins(std::ostream& os, const DriftReport& report, TableFormat format);

}  // namespace spn::cli
