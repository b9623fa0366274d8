#pragma once

#include <Eigen/Dense>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcd/data.hpp"
#include "mcd/discriminator.hpp"

//! Strict numeric CSV input and 17-significant-digit CSV output.  The
//! dialect is deliberately narrow: comma-separated, one header row, UTF-8,
//! decimal point '.', no quoting (cells are numeric).  Floats are written
//! with enough digits that re-parsing reproduces the exact bits.

namespace mcd {

//! A parsed CSV file: header names plus a rectangular numeric matrix.
struct CsvTable
{
    std::vector<std::string> header;
    Eigen::MatrixXd values;
};

namespace detail {

inline std::string trim(const std::string& s)
{
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos)
        return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

inline std::vector<std::string> split_commas(const std::string& line)
{
    std::vector<std::string> cells;
    std::string::size_type start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string::npos) {
            cells.push_back(trim(line.substr(start)));
            break;
        }
        cells.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return cells;
}

} // namespace detail

//! Parses a comma-separated numeric file with a single header row.
//! @throw std::runtime_error naming the file on I/O failure, or the exact
//!        row and column on a non-numeric or ragged cell.
inline CsvTable parse_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("parse_csv: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("parse_csv: '" + path + "' is empty");
    CsvTable table;
    table.header = detail::split_commas(line);
    const std::size_t width = table.header.size();
    if (width < 1)
        throw std::runtime_error("parse_csv: '" + path + "' has no columns");

    std::vector<double> cells;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty())
            continue;
        const auto row = detail::split_commas(line);
        ++rows;
        if (row.size() != width) {
            std::ostringstream msg;
            msg << "parse_csv: row " << rows << " of '" << path << "' has "
                << row.size() << " cells, expected " << width;
            throw std::runtime_error(msg.str());
        }
        for (std::size_t c = 0; c < width; ++c) {
            const std::string& cell = row[c];
            char* end = nullptr;
            errno = 0;
            const double value = std::strtod(cell.c_str(), &end);
            if (cell.empty() || end != cell.c_str() + cell.size()
                || errno == ERANGE) {
                std::ostringstream msg;
                msg << "parse_csv: non-numeric cell '" << cell << "' at row "
                    << rows << ", column " << (c + 1) << " ('"
                    << table.header[c] << "') of '" << path << "'";
                throw std::runtime_error(msg.str());
            }
            cells.push_back(value);
        }
    }
    table.values.resize(static_cast<Eigen::Index>(rows),
                        static_cast<Eigen::Index>(width));
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t c = 0; c < width; ++c)
            table.values(static_cast<Eigen::Index>(i),
                         static_cast<Eigen::Index>(c)) =
                cells[i * width + c];
    return table;
}

//! Result of ingesting a supervised CSV: the standardized dataset plus the
//! per-column transform that produced it (features first, target last in
//! the record), so predictions can be mapped back to raw units.
struct IngestResult
{
    SupervisedDataset data;          //!< standardized features and target
    Standardization record;          //!< columns: features..., target
    std::vector<std::string> feature_names;
    std::string target_name;
};

//! Loads a CSV and standardizes every column to zero mean and unit
//! variance (constant columns map to exact zero).  The target column is
//! selected by header name, or by zero-based index when the selector
//! parses as an integer.
//! @throw std::runtime_error when the target column cannot be found.
inline IngestResult ingest_csv(const std::string& path,
                               const std::string& target_column)
{
    const CsvTable table = parse_csv(path);
    if (table.header.size() < 2)
        throw std::runtime_error(
            "ingest_csv: need at least 2 columns (features and a target)");
    if (table.values.rows() < 1)
        throw std::runtime_error("ingest_csv: '" + path
                                 + "' has a header but no data rows");

    Eigen::Index target = -1;
    for (std::size_t c = 0; c < table.header.size(); ++c)
        if (table.header[c] == target_column)
            target = static_cast<Eigen::Index>(c);
    if (target < 0) {
        char* end = nullptr;
        const long idx = std::strtol(target_column.c_str(), &end, 10);
        if (!target_column.empty() && end == target_column.c_str() + target_column.size()
            && idx >= 0 && idx < static_cast<long>(table.header.size()))
            target = static_cast<Eigen::Index>(idx);
    }
    if (target < 0) {
        std::ostringstream msg;
        msg << "ingest_csv: target column '" << target_column
            << "' not found in '" << path << "'; columns are:";
        for (const auto& h : table.header)
            msg << ' ' << h;
        throw std::runtime_error(msg.str());
    }

    const Eigen::Index cols = table.values.cols();
    Eigen::MatrixXd reordered(table.values.rows(), cols);
    std::vector<std::string> feature_names;
    Eigen::Index at = 0;
    for (Eigen::Index c = 0; c < cols; ++c) {
        if (c == target)
            continue;
        reordered.col(at++) = table.values.col(c);
        feature_names.push_back(table.header[static_cast<std::size_t>(c)]);
    }
    reordered.col(cols - 1) = table.values.col(target);

    Standardization record = Standardization::fit(reordered);
    const Eigen::MatrixXd standardized = record.apply(reordered);
    return IngestResult{
        SupervisedDataset(standardized.leftCols(cols - 1),
                          standardized.rightCols(1)),
        std::move(record), std::move(feature_names),
        table.header[static_cast<std::size_t>(target)]};
}

//! Formats a double with 17 significant digits (round-trips exactly).
inline std::string format_double(double v)
{
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", v);
    return buffer;
}

//! Writes a CSV file in the output dialect.
//! @param rows cell grid, already formatted as strings.
//! @throw std::runtime_error when the path cannot be written.
inline void write_csv(const std::string& path,
                      const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("write_csv: cannot write '" + path + "'");
    for (std::size_t c = 0; c < header.size(); ++c)
        out << (c ? "," : "") << header[c];
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c)
            out << (c ? "," : "") << row[c];
        out << '\n';
    }
    if (!out)
        throw std::runtime_error("write_csv: failed writing '" + path + "'");
}

} // namespace mcd
