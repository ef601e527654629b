#pragma once

#include "lahda/metric.hpp"

#include <fmt/format.h>

#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace lahda {

/// RFC-4180 CSV file with a versioned schema comment as its first line.
/// Reals are written with 17 significant digits.
class CsvWriter {
public:
    CsvWriter(const std::string& path, std::string_view schema, const std::vector<std::string>& columns);

    CsvWriter& cell(double v);
    CsvWriter& cell(long v);
    CsvWriter& cell(int v) { return cell(static_cast<long>(v)); }
    CsvWriter& cell(std::size_t v) { return cell(static_cast<long>(v)); }
    CsvWriter& cell(std::string_view v);
    void end_row();

private:
    void separator();

    std::ofstream out_;
    std::size_t columns_;
    std::size_t filled_ = 0;
    std::string path_;
};

std::string csv_real(double v);

/// One row per node: label, x, then the upper-triangular entries row by row.
void write_metric_csv(CsvWriter& csv, std::string_view label, const MetricField& m);
std::vector<std::string> metric_csv_columns(int dim);

} // namespace lahda
