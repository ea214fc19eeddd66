#pragma once

#include <string>
#include <vector>

namespace wplap {

/// Line chart of the named columns of a CSV table (header row required)
/// against its x column. Non-numeric cells break the polyline.
std::string svg_line_chart(const std::string& csv, const std::string& x_column,
                           const std::vector<std::string>& y_columns, const std::string& title,
                           bool log_x = false);

}  // namespace wplap
