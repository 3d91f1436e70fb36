#pragma once

#include <string>
#include <utility>
#include <vector>

namespace stereoranger {

struct ErrorRow {
    double actual_cm = 0.0;
    double measured_cm = 0.0;
    double difference_cm = 0.0;     // |measured - actual|
    double error_pct = 0.0;         // |measured - actual| / actual * 100
    double error_pct_display = 0.0; // error_pct truncated to 2 decimals
};

struct ErrorReport {
    std::vector<ErrorRow> rows;
    double mean_display_pct = 0.0;   // mean of the truncated per-row errors
    double mean_unrounded_pct = 0.0; // mean of the exact per-row errors
};

/// Truncation toward zero at two decimals: the per-row arithmetic used by the
/// reference error table (6.666... -> 6.66).
double truncate_2dp(double value);

/// Per-row error percentages and their means. Throws NonPositiveActual when a
/// row's actual distance is not positive.
ErrorReport evaluate_error_table(const std::vector<std::pair<double, double>>& rows);

/// Loads `actual measured` rows, one pair per line, '#' comments.
std::vector<std::pair<double, double>> load_error_rows(const std::string& path);

/// actual | measured | difference | error-% table plus the two means.
std::string format_error_report(const ErrorReport& report);

}  // namespace stereoranger
