#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hap::report {

// A rectangular table of already formatted cells with a header row.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(std::string_view name) const;  // throws if absent
    bool operator==(const Table&) const = default;
};

// Shortest decimal text that parses back to the same double.
std::string format_number(double v);
double parse_number(std::string_view text);

// RFC 4180: CRLF line ends, fields quoted when they hold a comma, quote, CR or LF.
std::string to_csv(const Table& t);
Table parse_csv(std::string_view text);

void write_csv(const Table& t, const std::filesystem::path& path);
Table read_csv(const std::filesystem::path& path);

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct Chart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
};

// Self-contained 960x540 SVG line chart, one polyline per series.
std::string to_svg(const Chart& chart);
void write_svg(const Chart& chart, const std::filesystem::path& path);

// One series per value of group_column (x and y taken from the named columns).
Chart chart_by_group(const Table& t, std::string_view x_column, std::string_view y_column,
                     std::string_view group_column);
// One series per listed y column.
Chart chart_by_columns(const Table& t, std::string_view x_column,
                       const std::vector<std::string>& y_columns);

enum class Format { csv, svg };

struct ChartSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::string x_column;
    std::vector<std::string> y_columns;        // used when group_column is empty
    std::string group_column;
    std::string y_column;                      // used with group_column
};

// Writes the table (csv) or its chart (svg). Throws PreconditionError on an
// empty table and Error naming the path on I/O failure.
void emit_report(const Table& t, Format format, const std::filesystem::path& path,
                 const std::optional<ChartSpec>& chart = std::nullopt);

}  // namespace hap::report
