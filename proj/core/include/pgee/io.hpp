#ifndef PGEE_IO_HPP
#define PGEE_IO_HPP

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pgee/design.hpp"
#include "pgee/solver.hpp"

namespace pgee {

struct LongRow {
    std::string unit_id;
    std::string sequence_id;
    int period = 0;
    double time = 0.0;
    std::string treatment;
    double y = 0.0;
    std::optional<double> denominator;
};

/// Long-format panel: every (unit, period) carries exactly L rows. Rows are
/// normalized to (sequence, unit, period, time) order on parse.
struct LongDataset {
    std::vector<LongRow> rows;
    bool has_denominator = false;

    int n_units() const;
    int n_periods() const;
    int obs_per_period() const;
};

/// Parse comma-separated long-format data with a header row naming
/// unit_id, sequence_id, period, time, treatment, y and optionally
/// denominator.
LongDataset parse_long_csv(std::istream& in);
LongDataset parse_long_csv_file(const std::string& path);

/// Map the dataset onto the design's row order, checking that each unit's
/// treatment sequence matches a design sequence. Returns (y, denominators).
std::pair<Eigen::VectorXd, Eigen::VectorXd> align_response(const LongDataset& data,
                                                           const CrossoverDesign& design);

/// Design file: one sequence per line, comma-separated treatment labels.
std::vector<std::vector<std::string>> parse_design_file(const std::string& path);

/// Flat key-value config with [section] headers; keys are exposed as
/// "section.key".
struct RunConfig {
    std::map<std::string, std::string> values;

    bool has(const std::string& key) const { return values.count(key) > 0; }
    std::string get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;

    static RunConfig parse_file(const std::string& path);
    static RunConfig parse(std::istream& in);

    /// Assemble the design from the config (design file path, n, L, t_domain,
    /// optional explicit times).
    CrossoverDesign design(const std::string& base_dir = "") const;
    ModelSpec model_spec() const;
};

/// Minimal CSV helpers for the emitted artifacts; cells never contain commas.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);
std::pair<std::vector<std::string>, std::vector<std::vector<std::string>>>
read_csv(const std::string& path);

std::string format_double(double v);

} // namespace pgee

#endif
