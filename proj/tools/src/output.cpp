#include "spn_cli/output.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "spn/config.hpp"
#include "spn/error.hpp"

namespace spn::cli {

void Report::add_raw(const std::string& key, std::string value) { lines_.emplace_back(key, std::move(value)); }

void Report::add(const std::string& key, const std::string& value) { add_raw(key, value); }
void Report::add(const std::string& key, double value) { add_raw(key, format_double(value)); }
void Report::add(const std::string& key, bool value) { add_raw(key, value ? "true" : "false"); }
void Report::add(const std::string& key, int value) { add_raw(key, std::to_string(value)); }

void Report::section(const std::string& name) { lines_.emplace_back("", name); }

std::string Report::str() const {
    std::string out;
    for (const auto& [key, value] : lines_) {
        if (key.empty()) {
            out += "\n[" + value + "]\n";
        } else {
            out += key + " = " + value + "\n";
        }
    }
    return out;
}

char separator(TableFormat format) { return format == TableFormat::Tsv ? '\t' : ','; }
std::string extension(TableFormat format) { return format == TableFormat::Tsv ? ".tsv" : ".csv"; }

void write_trajectory(std::ostream& os, const Trajectory& traj, TableFormat format) {
    const char sep = separator(format);
    const int I = traj.num_buffers;
    os << "t" << sep << "norm";
    for (int i = 1; i <= I; ++i) os << sep << "Q_" << i;
    for (int i = 1; i <= I; ++i) os << sep << "V_" << i;
    for (int i = 1; i <= I && traj.counter_cap > 0; ++i) {
        for (int c = 1; c <= traj.counter_cap; ++c) os << sep << "Q_" << i << "_" << c;
    }
    const bool extra = traj.has_extra();
    if (extra) os << sep << traj.extra_name;
    os << "\n";
    for (const auto& row : traj.rows) {
        os << format_double(row.t) << sep << format_double(row.norm);
        for (double q : row.queue) os << sep << format_double(q);
        for (double v : row.in_service) os << sep << format_double(v);
        for (int n : row.counter_detail) os << sep << n;
        if (extra) os << sep << format_double(row.extra.value_or(0.0));
        os << "\n";
    }
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, sep)) cells.push_back(cell);
    if (!line.empty() && line.back() == sep) cells.emplace_back();
    return cells;
}

double parse_cell(const std::string& cell, std::size_t line_no) {
    try {
        std::size_t used = 0;
        const double x = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        return x;
    } catch (const std::exception&) {
        throw Error(ErrorCode::ConfigError, "line " + std::to_string(line_no) + ": not a number '" + cell + "'");
    }
}

}  // namespace

Trajectory read_trajectory(std::istream& is, TableFormat format) {
    const char sep = separator(format);
    std::string line;
    if (!std::getline(is, line)) throw Error(ErrorCode::ConfigError, "empty trajectory file");
    const auto header = split(line, sep);
    if (header.size() < 2 || header[0] != "t" || header[1] != "norm") {
        throw Error(ErrorCode::ConfigError, "trajectory header must start with t,norm");
    }
    Trajectory traj;
    std::vector<int> q_cols, v_cols;
    int extra_col = -1;
    for (std::size_t k = 2; k < header.size(); ++k) {
        const auto& h = header[k];
        const auto underscores = std::count(h.begin(), h.end(), '_');
        if (h.rfind("Q_", 0) == 0 && underscores == 1) {
            q_cols.push_back(static_cast<int>(k));
        } else if (h.rfind("V_", 0) == 0 && underscores == 1) {
            v_cols.push_back(static_cast<int>(k));
        } else if (h.rfind("Q_", 0) == 0) {
            continue;
        } else {
            extra_col = static_cast<int>(k);
            traj.extra_name = h;
        }
    }
    traj.num_buffers = static_cast<int>(q_cols.size());
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split(line, sep);
        if (cells.size() != header.size()) {
            throw Error(ErrorCode::ConfigError, "line " + std::to_string(line_no) + ": wrong number of columns");
        }
        SampleRow row;
        row.t = parse_cell(cells[0], line_no);
        row.norm = parse_cell(cells[1], line_no);
        for (int k : q_cols) row.queue.push_back(parse_cell(cells[k], line_no));
        for (int k : v_cols) row.in_service.push_back(parse_cell(cells[k], line_no));
        if (extra_col >= 0) row.extra = parse_cell(cells[extra_col], line_no);
        if (!traj.rows.empty() && !(row.t > traj.rows.back().t)) {
            throw Error(ErrorCode::ConfigError, "line " + std::to_string(line_no) + ": sample times must increase");
        }
        traj.rows.push_back(std::move(row));
    }
    if (!traj.rows.empty()) {
        traj.horizon = traj.rows.back().t;
        double area = 0.0;
        for (std::size_t k = 1; k < traj.rows.size(); ++k) {
            const auto& a = traj.rows[k - 1];
            const auto& b = traj.rows[k];
            area += 0.5 * (a.norm + b.norm) * (b.t - a.t);
        }
        const double span = traj.rows.back().t - traj.rows.front().t;
        traj.time_avg_norm = span > 0.0 ? area / span : traj.rows.front().norm;
        traj.final_norm = traj.rows.back().norm;
    }
    return traj;
}

void write_drift_bins(std::ostream& os, const DriftReport& report, TableFormat format) {
    const char sep = separator(format);
    os << "|Y|_lo" << sep << "|Y|_hi" << sep << "n" << sep << "mean_increment" << sep << "stderr\n";
    for (const auto& bin : report.bins) {
        os << format_double(bin.lo) << sep << format_double(bin.hi) << sep << bin.n << sep
           << format_double(bin.mean_increment) << sep << format_double(bin.stderr_increment) << "\n";
    }
}

}  // namespace spn::cli
