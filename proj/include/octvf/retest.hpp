#pragma once

#include <string>
#include <vector>

#include "octvf/common.hpp"

namespace octvf {

/// Empirical 90% test-retest limits per measured sensitivity level.
/// Supplied as external data; the bundled default is synthetic.
class RetestCITable {
public:
    struct Row {
        double measured_db;
        double lower_db;
        double upper_db;
    };

    explicit RetestCITable(std::vector<Row> rows);

    const std::vector<Row>& rows() const { return rows_; }
    double min_level() const { return rows_.front().measured_db; }
    double max_level() const { return rows_.back().measured_db; }

    /// Row with measured level nearest to `level`. Throws if `level` lies
    /// outside the table's measured range.
    const Row& nearest(double level) const;

private:
    std::vector<Row> rows_;
};

/// Reads `measured_db,lower_db,upper_db` rows.
RetestCITable load_retest_ci(const std::string& csv_text);
RetestCITable load_retest_ci_file(const std::string& path);

/// Synthetic default: limits widen toward low sensitivities, mimicking the
/// published shape of test-retest variability without its numeric content.
std::string default_retest_ci_csv();

}  // namespace octvf
