#include "lahda/csv.hpp"

#include <stdexcept>

namespace lahda {

std::string csv_real(double v)
{
    return fmt::format("{:.17g}", v);
}

CsvWriter::CsvWriter(const std::string& path, std::string_view schema, const std::vector<std::string>& columns)
    : out_(path), columns_(columns.size()), path_(path)
{
    if (!out_) {
        throw std::runtime_error(fmt::format("cannot open '{}' for writing", path));
    }
    out_ << "# lahda-csv v1 " << schema << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) {
        out_ << (i ? "," : "") << columns[i];
    }
    out_ << "\n";
}

void CsvWriter::separator()
{
    if (filled_ >= columns_) {
        throw std::logic_error(fmt::format("{}: too many cells in row", path_));
    }
    if (filled_++ > 0) {
        out_ << ',';
    }
}

CsvWriter& CsvWriter::cell(double v)
{
    separator();
    out_ << csv_real(v);
    return *this;
}

CsvWriter& CsvWriter::cell(long v)
{
    separator();
    out_ << v;
    return *this;
}

CsvWriter& CsvWriter::cell(std::string_view v)
{
    separator();
    if (v.find_first_of(",\"\n\r") == std::string_view::npos) {
        out_ << v;
        return *this;
    }
    out_ << '"';
    for (char ch : v) {
        if (ch == '"') {
            out_ << '"';
        }
        out_ << ch;
    }
    out_ << '"';
    return *this;
}

void CsvWriter::end_row()
{
    if (filled_ != columns_) {
        throw std::logic_error(fmt::format("{}: row has {} cells, expected {}", path_, filled_, columns_));
    }
    out_ << "\n";
    filled_ = 0;
}

std::vector<std::string> metric_csv_columns(int dim)
{
    std::vector<std::string> cols{"label", "x"};
    for (int i = 0; i < dim; ++i) {
        for (int j = i; j < dim; ++j) {
            cols.push_back(fmt::format("m{}{}", i + 1, j + 1));
        }
    }
    return cols;
}

void write_metric_csv(CsvWriter& csv, std::string_view label, const MetricField& m)
{
    const MetricField nodal = m.to_nodes();
    for (std::size_t k = 0; k < nodal.size(); ++k) {
        csv.cell(label).cell(nodal.mesh()[k]);
        for (int i = 0; i < nodal.dim(); ++i) {
            for (int j = i; j < nodal.dim(); ++j) {
                csv.cell(nodal[k](i, j));
            }
        }
        csv.end_row();
    }
}

} // namespace lahda
