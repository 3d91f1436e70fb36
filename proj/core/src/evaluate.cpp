#include "stereoranger/evaluate.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "stereoranger/errors.hpp"

namespace stereoranger {

double truncate_2dp(double value) {
    // the 1e-9 guard keeps exactly-representable hundredths from slipping a bin
    return std::trunc(value * 100.0 + (value >= 0.0 ? 1e-9 : -1e-9)) / 100.0;
}

ErrorReport evaluate_error_table(const std::vector<std::pair<double, double>>& rows) {
    ErrorReport report;
    report.rows.reserve(rows.size());
    double sum_display = 0.0;
    double sum_exact = 0.0;
    for (const auto& [actual, measured] : rows) {
        if (!(actual > 0.0))
            throw NonPositiveActual("actual distance must be positive");
        ErrorRow row;
        row.actual_cm = actual;
        row.measured_cm = measured;
        row.difference_cm = std::abs(measured - actual);
        row.error_pct = row.difference_cm / actual * 100.0;
        row.error_pct_display = truncate_2dp(row.error_pct);
        sum_display += row.error_pct_display;
        sum_exact += row.error_pct;
        report.rows.push_back(row);
    }
    if (!report.rows.empty()) {
        report.mean_display_pct = sum_display / static_cast<double>(report.rows.size());
        report.mean_unrounded_pct = sum_exact / static_cast<double>(report.rows.size());
    }
    return report;
}

std::vector<std::pair<double, double>> load_error_rows(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open error table '" + path + "'");
    std::vector<std::pair<double, double>> rows;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.resize(hash);
        std::istringstream ss(line);
        double actual, measured;
        if (!(ss >> actual))
            continue;
        if (!(ss >> measured))
            throw FormatError("error-row", line_no, "expected `actual measured`");
        rows.emplace_back(actual, measured);
    }
    return rows;
}

std::string format_error_report(const ErrorReport& report) {
    std::ostringstream ss;
    ss << "Actual (cm)\tMeasured (cm)\tDifference (cm)\tError (as a percent)\n";
    char buf[64];
    for (const ErrorRow& row : report.rows) {
        std::snprintf(buf, sizeof(buf), "%g\t%g\t%g\t%.2f\n", row.actual_cm, row.measured_cm,
                      row.difference_cm, row.error_pct_display);
        ss << buf;
    }
    std::snprintf(buf, sizeof(buf), "mean error: %.3f%%\n", report.mean_display_pct);
    ss << buf;
    std::snprintf(buf, sizeof(buf), "mean error (unrounded): %.4f%%\n", report.mean_unrounded_pct);
    ss << buf;
    return ss.str();
}

}  // namespace stereoranger
