#include "octvf/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "octvf/bytes.hpp"

namespace octvf {

std::vector<std::string> split_fields(const std::string& line, char sep) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

Csv Csv::parse(const std::string& text) {
    Csv csv;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        auto fields = split_fields(line);
        if (first) {
            csv.header = std::move(fields);
            first = false;
        } else {
            if (fields.size() != csv.header.size()) {
                throw Error("csv row " + std::to_string(csv.rows.size() + 2) + " has " +
                            std::to_string(fields.size()) + " fields, header has " +
                            std::to_string(csv.header.size()));
            }
            csv.rows.push_back(std::move(fields));
        }
    }
    if (first) throw Error("csv: empty input, no header row");
    return csv;
}

Csv Csv::read_file(const std::string& path) {
    return parse(read_file_bytes(path));
}

int Csv::column(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
}

std::string Csv::to_string() const {
    std::string out;
    auto append_row = [&out](const std::vector<std::string>& row) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) out.push_back(',');
            out += row[i];
        }
        out.push_back('\n');
    };
    append_row(header);
    for (const auto& row : rows) append_row(row);
    return out;
}

void Csv::write_file(const std::string& path) const {
    write_file_bytes(path, to_string());
}

std::string format_f32(float v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(v));
    return buf;
}

std::string format_f64(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& s, const std::string& context) {
    if (s.empty()) throw Error(context + ": empty numeric field");
    errno = 0;
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (errno != 0 || end == s.c_str() || *end != '\0') {
        throw Error(context + ": not a number: '" + s + "'");
    }
    return v;
}

long long parse_int(const std::string& s, const std::string& context) {
    if (s.empty()) throw Error(context + ": empty integer field");
    errno = 0;
    char* end = nullptr;
    long long v = std::strtoll(s.c_str(), &end, 10);
    if (errno != 0 || end == s.c_str() || *end != '\0') {
        throw Error(context + ": not an integer: '" + s + "'");
    }
    return v;
}

}  // namespace octvf
