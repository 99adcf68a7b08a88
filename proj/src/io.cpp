#include "birkhoff/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "birkhoff/error.hpp"

namespace birkhoff::io {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

CsvWriter::CsvWriter(const std::string& path) : out_(path) {
    if (!out_) throw ConfigError("cannot open output file " + path);
}

CsvWriter::CsvWriter(const std::string& path, std::initializer_list<std::string_view> header) : CsvWriter(path) {
    bool first = true;
    for (auto h : header) {
        if (!first) out_ << ',';
        out_ << h;
        first = false;
    }
    out_ << '\n';
}

void CsvWriter::header(std::span<const std::string> names) {
    for (std::size_t i = 0; i < names.size(); ++i) out_ << (i ? "," : "") << names[i];
    out_ << '\n';
}

void CsvWriter::row(std::initializer_list<double> values) {
    row(std::span<const double>(values.begin(), values.size()));
}

void CsvWriter::row(std::span<const double> values) {
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_double(values[i]);
    out_ << '\n';
}

std::vector<std::vector<double>> read_numeric_csv(const std::string& path, std::vector<std::string>* header) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    std::string line;
    std::vector<std::vector<double>> rows;
    if (!std::getline(in, line)) throw ConfigError("empty csv file " + path);
    if (header) {
        header->clear();
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header->push_back(cell);
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw ConfigError("non-numeric csv cell '" + cell + "' in " + path);
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_svg_plot(const std::string& path, const std::string& title, const std::vector<SvgSeries>& series,
                    const std::string& x_label, const std::string& y_label) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open output file " + path);
    double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo, y_lo = x_lo, y_hi = -x_lo;
    for (const auto& s : series) {
        for (double v : s.x)
            if (std::isfinite(v)) x_lo = std::min(x_lo, v), x_hi = std::max(x_hi, v);
        for (double v : s.y)
            if (std::isfinite(v)) y_lo = std::min(y_lo, v), y_hi = std::max(y_hi, v);
    }
    if (!(x_hi > x_lo)) x_lo -= 1.0, x_hi += 1.0;
    if (!(y_hi > y_lo)) y_lo -= 1.0, y_hi += 1.0;
    const double w = 640, h = 480, ml = 70, mr = 20, mt = 40, mb = 50;
    auto sx = [&](double x) { return ml + (x - x_lo) / (x_hi - x_lo) * (w - ml - mr); };
    auto sy = [&](double y) { return h - mb - (y - y_lo) / (y_hi - y_lo) * (h - mt - mb); };
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.2f", v);
        return std::string(buf);
    };
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title << "</text>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr << "\" y2=\"" << h - mb
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << h - mb
        << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double xv = x_lo + (x_hi - x_lo) * k / 4.0, yv = y_lo + (y_hi - y_lo) * k / 4.0;
        out << "<text x=\"" << num(sx(xv)) << "\" y=\"" << h - mb + 18 << "\" text-anchor=\"middle\" font-size=\"11\">"
            << num(xv) << "</text>\n";
        out << "<text x=\"" << ml - 6 << "\" y=\"" << num(sy(yv) + 4) << "\" text-anchor=\"end\" font-size=\"11\">"
            << num(yv) << "</text>\n";
    }
    out << "<text x=\"" << w / 2 << "\" y=\"" << h - 10 << "\" text-anchor=\"middle\" font-size=\"13\">" << x_label
        << "</text>\n";
    out << "<text x=\"16\" y=\"" << h / 2 << "\" transform=\"rotate(-90 16 " << h / 2
        << ")\" text-anchor=\"middle\" font-size=\"13\">" << y_label << "</text>\n";
    for (const auto& s : series) {
        const std::size_t n = std::min(s.x.size(), s.y.size());
        if (s.points) {
            for (std::size_t i = 0; i < n; ++i)
                out << "<circle cx=\"" << num(sx(s.x[i])) << "\" cy=\"" << num(sy(s.y[i])) << "\" r=\"0.8\" fill=\""
                    << s.color << "\"/>\n";
        } else {
            out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1\" points=\"";
            for (std::size_t i = 0; i < n; ++i) out << num(sx(s.x[i])) << ',' << num(sy(s.y[i])) << ' ';
            out << "\"/>\n";
        }
    }
    double ly = mt + 10;
    for (const auto& s : series) {
        if (s.label.empty()) continue;
        out << "<text x=\"" << w - mr - 150 << "\" y=\"" << ly << "\" font-size=\"12\" fill=\"" << s.color << "\">"
            << s.label << "</text>\n";
        ly += 16;
    }
    out << "</svg>\n";
}

}  // namespace birkhoff::io
