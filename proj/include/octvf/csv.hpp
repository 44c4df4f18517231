#pragma once

#include <string>
#include <vector>

#include "octvf/common.hpp"

namespace octvf {

/// Minimal CSV: comma separated, first row is the header, no quoting.
/// Matches the plain tabular files this pipeline reads and writes.
struct Csv {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    static Csv parse(const std::string& text);
    static Csv read_file(const std::string& path);

    /// Column index by name; -1 if absent.
    int column(const std::string& name) const;

    std::string to_string() const;
    void write_file(const std::string& path) const;
};

std::vector<std::string> split_fields(const std::string& line, char sep = ',');

/// Shortest decimal form that round-trips the value (f32: 9 digits, f64: 17).
std::string format_f32(float v);
std::string format_f64(double v);

double parse_double(const std::string& s, const std::string& context);
long long parse_int(const std::string& s, const std::string& context);

}  // namespace octvf
