#include "octvf/retest.hpp"

#include <algorithm>
#include <cmath>

#include "octvf/bytes.hpp"
#include "octvf/csv.hpp"

namespace octvf {

RetestCITable::RetestCITable(std::vector<Row> rows) : rows_(std::move(rows)) {
    if (rows_.empty()) throw Error("retest table: no rows");
    for (size_t i = 0; i < rows_.size(); ++i) {
        const Row& r = rows_[i];
        if (!std::isfinite(r.measured_db) || !std::isfinite(r.lower_db) ||
            !std::isfinite(r.upper_db)) {
            throw Error("retest table row " + std::to_string(i) + ": non-finite value");
        }
        if (r.lower_db > r.upper_db) {
            throw Error("retest table row " + std::to_string(i) + ": lower > upper");
        }
        if (i > 0 && rows_[i - 1].measured_db >= r.measured_db) {
            throw Error("retest table: measured levels must be unique and ascending");
        }
    }
}

const RetestCITable::Row& RetestCITable::nearest(double level) const {
    if (level < min_level() || level > max_level()) {
        throw Error("retest table: level " + std::to_string(level) +
                    " outside table range [" + std::to_string(min_level()) + "," +
                    std::to_string(max_level()) + "]");
    }
    const Row* best = &rows_.front();
    double best_d = std::abs(level - best->measured_db);
    for (const Row& r : rows_) {
        const double d = std::abs(level - r.measured_db);
        if (d < best_d) {
            best = &r;
            best_d = d;
        }
    }
    return *best;
}

RetestCITable load_retest_ci(const std::string& csv_text) {
    const Csv csv = Csv::parse(csv_text);
    const int m = csv.column("measured_db");
    const int lo = csv.column("lower_db");
    const int hi = csv.column("upper_db");
    if (m < 0 || lo < 0 || hi < 0) {
        throw Error("retest table: header must contain measured_db,lower_db,upper_db");
    }
    std::vector<RetestCITable::Row> rows;
    for (size_t r = 0; r < csv.rows.size(); ++r) {
        const std::string where = "retest table row " + std::to_string(r + 2);
        rows.push_back({parse_double(csv.rows[r][m], where), parse_double(csv.rows[r][lo], where),
                        parse_double(csv.rows[r][hi], where)});
    }
    return RetestCITable(std::move(rows));
}

RetestCITable load_retest_ci_file(const std::string& path) {
    return load_retest_ci(read_file_bytes(path));
}

std::string default_retest_ci_csv() {
    // Interval half-width shrinks roughly linearly with measured level;
    // retests of low thresholds scatter widely, near-ceiling ones little.
    std::string out = "measured_db,lower_db,upper_db\n";
    for (int level = 0; level <= 40; ++level) {
        const double spread_up = 2.0 + 10.0 * (40.0 - level) / 40.0;
        const double spread_down = 1.5 + 14.0 * (40.0 - level) / 40.0;
        const double lo = std::max(0.0, level - spread_down);
        const double hi = std::min(42.0, level + spread_up);
        out += std::to_string(level) + "," + format_f64(lo) + "," + format_f64(hi) + "\n";
    }
    return out;
}

}  // namespace octvf
