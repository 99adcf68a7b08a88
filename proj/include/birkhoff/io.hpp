#pragma once

#include <fstream>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace birkhoff::io {

// Shortest deterministic text for a double: 17 significant digits.
std::string format_double(double x);

class CsvWriter {
public:
    CsvWriter(const std::string& path, std::initializer_list<std::string_view> header);
    explicit CsvWriter(const std::string& path);

    void header(std::span<const std::string> names);
    void row(std::initializer_list<double> values);
    void row(std::span<const double> values);

private:
    std::ofstream out_;
};

// Reads a numeric CSV with one header line; returns the rows.
std::vector<std::vector<double>> read_numeric_csv(const std::string& path, std::vector<std::string>* header = nullptr);

struct SvgSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f77b4";
    bool points = false;
};

// Static plot with axes and polylines (or point markers).
void write_svg_plot(const std::string& path, const std::string& title, const std::vector<SvgSeries>& series,
                    const std::string& x_label, const std::string& y_label);

}  // namespace birkhoff::io
