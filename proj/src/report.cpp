#include "hap/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "hap/error.hpp"

namespace hap::report {

std::size_t Table::column(std::string_view name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw PreconditionError("table has no column '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - header.begin());
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_number(std::string_view text) {
    if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (text == "inf") return std::numeric_limits<double>::infinity();
    if (text == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw ConfigError("not a number: '" + std::string(text) + "'");
    }
    return v;
}

namespace {

bool needs_quotes(const std::string& s) {
    return s.find_first_of(",\"\r\n") != std::string::npos;
}

void append_field(std::string& out, const std::string& s) {
    if (!needs_quotes(s)) {
        out += s;
        return;
    }
    out += '"';
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
}

void append_record(std::string& out, const std::vector<std::string>& rec) {
    for (std::size_t i = 0; i < rec.size(); ++i) {
        if (i) out += ',';
        append_field(out, rec[i]);
    }
    out += "\r\n";
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("failed writing " + path.string());
}

}  // namespace

std::string to_csv(const Table& t) {
    std::string out;
    append_record(out, t.header);
    for (const auto& row : t.rows) {
        if (row.size() != t.header.size()) throw DimensionError("row width differs from header");
        append_record(out, row);
    }
    return out;
}

Table parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> rec;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    std::size_t i = 0;
    auto end_record = [&] {
        rec.push_back(std::move(field));
        field.clear();
        records.push_back(std::move(rec));
        rec.clear();
        field_started = false;
    };
    while (i < text.size()) {
        const char ch = text[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    i += 2;
                    continue;
                }
                quoted = false;
            } else {
                field += ch;
            }
            ++i;
            continue;
        }
        if (ch == '"' && field.empty()) {
            quoted = true;
            field_started = true;
        } else if (ch == ',') {
            rec.push_back(std::move(field));
            field.clear();
            field_started = true;
        } else if (ch == '\r' || ch == '\n') {
            end_record();
            if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
        } else {
            field += ch;
            field_started = true;
        }
        ++i;
    }
    if (quoted) throw ConfigError("unterminated quoted CSV field");
    if (field_started || !field.empty() || !rec.empty()) end_record();

    Table t;
    if (records.empty()) return t;
    t.header = std::move(records.front());
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != t.header.size()) {
            throw ConfigError("CSV record " + std::to_string(r) + " has " +
                              std::to_string(records[r].size()) + " fields, header has " +
                              std::to_string(t.header.size()));
        }
        t.rows.push_back(std::move(records[r]));
    }
    return t;
}

void write_csv(const Table& t, const std::filesystem::path& path) { write_file(path, to_csv(t)); }

Table read_csv(const std::filesystem::path& path) {
    try {
        return parse_csv(read_file(path));
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------- SVG

namespace {

constexpr double kWidth = 960.0;
constexpr double kHeight = 540.0;
constexpr double kLeft = 90.0;
constexpr double kRight = 180.0;
constexpr double kTop = 50.0;
constexpr double kBottom = 70.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += ch;
        }
    }
    return out;
}

std::string fixed(double v, int digits = 2) {
    std::ostringstream ss;
    ss.setf(std::ios::fixed);
    ss.precision(digits);
    ss << v;
    return ss.str();
}

std::string tick_label(double v) {
    std::ostringstream ss;
    ss.precision(4);
    ss << v;
    return ss.str();
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void add(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void finish() {
        if (!std::isfinite(lo)) {
            lo = 0.0;
            hi = 1.0;
        }
        if (hi - lo <= 0.0) {
            const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.05;
            lo -= pad;
            hi += pad;
        }
    }
};

}  // namespace

std::string to_svg(const Chart& chart) {
    Range xr;
    Range yr;
    for (const auto& s : chart.series) {
        if (s.x.size() != s.y.size()) throw DimensionError("series x and y lengths differ");
        for (double v : s.x) xr.add(v);
        for (double v : s.y) yr.add(v);
    }
    xr.finish();
    yr.finish();
    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto sx = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
    auto sy = [&](double y) { return kTop + ph - (y - yr.lo) / (yr.hi - yr.lo) * ph; };

    std::ostringstream o;
    o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 960 540\" width=\"960\" "
         "height=\"540\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"960\" height=\"540\" fill=\"white\"/>\n"
      << "<text x=\"" << fixed(kLeft + pw / 2) << "\" y=\"28\" text-anchor=\"middle\" "
      << "font-size=\"16\">" << xml_escape(chart.title) << "</text>\n"
      << "<g stroke=\"black\" stroke-width=\"1\">\n"
      << "<line x1=\"" << fixed(kLeft) << "\" y1=\"" << fixed(kTop + ph) << "\" x2=\""
      << fixed(kLeft + pw) << "\" y2=\"" << fixed(kTop + ph) << "\"/>\n"
      << "<line x1=\"" << fixed(kLeft) << "\" y1=\"" << fixed(kTop) << "\" x2=\"" << fixed(kLeft)
      << "\" y2=\"" << fixed(kTop + ph) << "\"/>\n"
      << "</g>\n";
    constexpr int kTicks = 5;
    for (int i = 0; i <= kTicks; ++i) {
        const double xv = xr.lo + (xr.hi - xr.lo) * i / kTicks;
        const double yv = yr.lo + (yr.hi - yr.lo) * i / kTicks;
        o << "<text x=\"" << fixed(sx(xv)) << "\" y=\"" << fixed(kTop + ph + 18)
          << "\" text-anchor=\"middle\">" << tick_label(xv) << "</text>\n";
        o << "<text x=\"" << fixed(kLeft - 8) << "\" y=\"" << fixed(sy(yv) + 4)
          << "\" text-anchor=\"end\">" << tick_label(yv) << "</text>\n";
    }
    o << "<text x=\"" << fixed(kLeft + pw / 2) << "\" y=\"" << fixed(kHeight - 20)
      << "\" text-anchor=\"middle\">" << xml_escape(chart.x_label) << "</text>\n";
    o << "<text x=\"20\" y=\"" << fixed(kTop + ph / 2) << "\" text-anchor=\"middle\" "
      << "transform=\"rotate(-90 20 " << fixed(kTop + ph / 2) << ")\">"
      << xml_escape(chart.y_label) << "</text>\n";

    for (std::size_t s = 0; s < chart.series.size(); ++s) {
        const Series& ser = chart.series[s];
        const char* colour = kPalette[s % std::size(kPalette)];
        o << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\" points=\"";
        bool first = true;
        for (std::size_t i = 0; i < ser.x.size(); ++i) {
            if (!std::isfinite(ser.x[i]) || !std::isfinite(ser.y[i])) continue;
            if (!first) o << ' ';
            o << fixed(sx(ser.x[i])) << ',' << fixed(sy(ser.y[i]));
            first = false;
        }
        o << "\"><title>" << xml_escape(ser.name) << "</title></polyline>\n";
        const double ly = kTop + 10 + 20.0 * static_cast<double>(s);
        o << "<line x1=\"" << fixed(kLeft + pw + 15) << "\" y1=\"" << fixed(ly) << "\" x2=\""
          << fixed(kLeft + pw + 40) << "\" y2=\"" << fixed(ly) << "\" stroke=\"" << colour
          << "\" stroke-width=\"2\"/>\n";
        o << "<text x=\"" << fixed(kLeft + pw + 46) << "\" y=\"" << fixed(ly + 4) << "\">"
          << xml_escape(ser.name) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

void write_svg(const Chart& chart, const std::filesystem::path& path) {
    write_file(path, to_svg(chart));
}

Chart chart_by_group(const Table& t, std::string_view x_column, std::string_view y_column,
                     std::string_view group_column) {
    const std::size_t xi = t.column(x_column);
    const std::size_t yi = t.column(y_column);
    const std::size_t gi = t.column(group_column);
    Chart c;
    std::map<std::string, std::size_t> index;
    for (const auto& row : t.rows) {
        auto [it, inserted] = index.try_emplace(row[gi], c.series.size());
        if (inserted) c.series.push_back({row[gi], {}, {}});
        Series& s = c.series[it->second];
        s.x.push_back(parse_number(row[xi]));
        s.y.push_back(parse_number(row[yi]));
    }
    c.x_label = std::string(x_column);
    c.y_label = std::string(y_column);
    return c;
}

Chart chart_by_columns(const Table& t, std::string_view x_column,
                       const std::vector<std::string>& y_columns) {
    const std::size_t xi = t.column(x_column);
    Chart c;
    for (const auto& name : y_columns) {
        const std::size_t yi = t.column(name);
        Series s{name, {}, {}};
        for (const auto& row : t.rows) {
            s.x.push_back(parse_number(row[xi]));
            s.y.push_back(parse_number(row[yi]));
        }
        c.series.push_back(std::move(s));
    }
    c.x_label = std::string(x_column);
    return c;
}

void emit_report(const Table& t, Format format, const std::filesystem::path& path,
                 const std::optional<ChartSpec>& chart) {
    if (t.rows.empty()) throw PreconditionError("refusing to emit an empty table");
    if (format == Format::csv) {
        write_csv(t, path);
        return;
    }
    if (!chart) throw PreconditionError("SVG output needs a chart specification");
    Chart c = chart->group_column.empty()
                  ? chart_by_columns(t, chart->x_column, chart->y_columns)
                  : chart_by_group(t, chart->x_column, chart->y_column, chart->group_column);
    c.title = chart->title;
    if (!chart->x_label.empty()) c.x_label = chart->x_label;
    if (!chart->y_label.empty()) c.y_label = chart->y_label;
    write_svg(c, path);
}

}  // namespace hap::report
