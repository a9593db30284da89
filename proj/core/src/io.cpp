#include "pgee/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace pgee {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, sep)) out.push_back(cell);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& cell, int line_no) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(cell, &pos);
        if (pos != cell.size()) throw std::invalid_argument(cell);
        return v;
    } catch (const std::exception&) {
        throw NonNumericValue("non-numeric value '" + cell + "' at line " + std::to_string(line_no));
    }
}

} // namespace

int LongDataset::n_units() const {
    std::set<std::string> units;
    for (const auto& r : rows) units.insert(r.unit_id);
    return static_cast<int>(units.size());
}

int LongDataset::n_periods() const {
    int p = 0;
    for (const auto& r : rows) p = std::max(p, r.period);
    return p;
}

int LongDataset::obs_per_period() const {
    if (rows.empty()) return 0;
    std::map<std::pair<std::string, int>, int> counts;
    for (const auto& r : rows) ++counts[{r.unit_id, r.period}];
    return counts.begin()->second;
}

LongDataset parse_long_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw MissingColumn("empty input");
    const auto header = split(trim(line), ',');
    std::map<std::string, int> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[trim(header[i])] = static_cast<int>(i);
    for (const char* required : {"unit_id", "sequence_id", "period", "time", "treatment", "y"})
        if (!col.count(required)) throw MissingColumn(std::string("missing column: ") + required);
    const bool has_denom = col.count("denominator") > 0;

    LongDataset data;
    data.has_denominator = has_denom;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto cells = split(t, ',');
        if (cells.size() < col.size())
            throw NonNumericValue("too few cells at line " + std::to_string(line_no));
        LongRow r;
        r.unit_id = trim(cells[col["unit_id"]]);
        r.sequence_id = trim(cells[col["sequence_id"]]);
        r.period = static_cast<int>(parse_number(trim(cells[col["period"]]), line_no));
        r.time = parse_number(trim(cells[col["time"]]), line_no);
        r.treatment = trim(cells[col["treatment"]]);
        r.y = parse_number(trim(cells[col["y"]]), line_no);
        if (has_denom) {
            r.denominator = parse_number(trim(cells[col["denominator"]]), line_no);
            if (*r.denominator <= 0) throw NonNumericValue("denominator must be positive at line " + std::to_string(line_no));
            if (r.y < 0.0 || r.y > 1.0)
                throw NonNumericValue("proportion outside [0,1] at line " + std::to_string(line_no));
        }
        if (r.period < 1) throw NonNumericValue("period must be >= 1 at line " + std::to_string(line_no));
        data.rows.push_back(std::move(r));
    }
    if (data.rows.empty()) throw IncompletePanel("no data rows");

    // Complete panel: every (unit, period) has the modal number of rows.
    std::map<std::pair<std::string, int>, int> counts;
    std::map<std::string, std::set<int>> unit_periods;
    int P = 0;
    for (const auto& r : data.rows) {
        ++counts[{r.unit_id, r.period}];
        unit_periods[r.unit_id].insert(r.period);
        P = std::max(P, r.period);
    }
    const int L = counts.begin()->second;
    for (const auto& [key, c] : counts)
        if (c != L)
            throw IncompletePanel("unit " + key.first + " period " + std::to_string(key.second) +
                                  " has " + std::to_string(c) + " rows, expected " + std::to_string(L));
    for (const auto& [unit, periods] : unit_periods)
        for (int p = 1; p <= P; ++p)
            if (!periods.count(p))
                throw IncompletePanel("unit " + unit + " is missing period " + std::to_string(p));

    std::stable_sort(data.rows.begin(), data.rows.end(), [](const LongRow& a, const LongRow& b) {
        return std::tie(a.sequence_id, a.unit_id, a.period, a.time) <
               std::tie(b.sequence_id, b.unit_id, b.period, b.time);
    });
    return data;
}

LongDataset parse_long_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open data file: " + path);
    return parse_long_csv(in);
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> align_response(const LongDataset& data,
                                                           const CrossoverDesign& design) {
    design.validate();
    const int P = design.n_periods();
    const int L = design.n_obs_per_period();

    // Treatment sequence per unit, in (sequence_id, unit_id) order.
    std::vector<std::pair<std::string, std::vector<const LongRow*>>> units;
    for (const auto& r : data.rows) {
        if (units.empty() || units.back().first != r.unit_id)
            units.push_back({r.unit_id, {}});
        units.back().second.push_back(&r);
    }
    if (static_cast<int>(units.size()) != design.n_units_total())
        throw DataShapeMismatch("dataset has " + std::to_string(units.size()) +
                                " units, design expects " + std::to_string(design.n_units_total()));

    Eigen::VectorXd y(static_cast<Eigen::Index>(units.size()) * P * L);
    Eigen::VectorXd denom = Eigen::VectorXd::Ones(y.size());

    Eigen::Index at = 0;
    std::size_t unit_idx = 0;
    for (int s = 0; s < design.n_sequences(); ++s) {
        for (int u = 0; u < design.units_per_sequence; ++u, ++unit_idx) {
            const auto& [unit_id, rows] = units[unit_idx];
            if (static_cast<int>(rows.size()) != P * L)
                throw IncompletePanel("unit " + unit_id + " has wrong number of rows");
            for (int j = 0; j < P; ++j) {
                for (int k = 0; k < L; ++k, ++at) {
                    const LongRow* r = rows[j * L + k];
                    if (r->period != j + 1)
                        throw DataShapeMismatch("unit " + unit_id + ": unexpected period ordering");
                    if (r->treatment != design.sequences[s][j])
                        throw DataShapeMismatch("unit " + unit_id + " period " + std::to_string(j + 1) +
                                                ": treatment " + r->treatment + " does not match design sequence " +
                                                std::to_string(s + 1));
                    y[at] = r->y;
                    if (r->denominator) denom[at] = *r->denominator;
                }
            }
        }
    }
    return {y, denom};
}

std::vector<std::vector<std::string>> parse_design_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open design file: " + path);
    std::vector<std::vector<std::string>> seqs;
    std::string line;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::vector<std::string> seq;
        for (const auto& cell : split(t, ',')) seq.push_back(trim(cell));
        seqs.push_back(std::move(seq));
    }
    if (seqs.empty()) throw ConfigError("design file has no sequences: " + path);
    return seqs;
}

std::string RunConfig::get(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end()) throw ConfigError("missing config key: " + key);
    return it->second;
}

std::string RunConfig::get_or(const std::string& key, const std::string& fallback) const {
    auto it = values.find(key);
    return it == values.end() ? fallback : it->second;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
    auto it = values.find(key);
    return it == values.end() ? fallback : parse_number(it->second, 0);
}

int RunConfig::get_int(const std::string& key, int fallback) const {
    auto it = values.find(key);
    return it == values.end() ? fallback : static_cast<int>(parse_number(it->second, 0));
}

RunConfig RunConfig::parse(std::istream& in) {
    RunConfig cfg;
    std::string line, section;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[' && t.back() == ']') {
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError("config line without '=': " + t);
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        cfg.values[section.empty() ? key : section + "." + key] = value;
    }
    return cfg;
}

RunConfig RunConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return parse(in);
}

CrossoverDesign RunConfig::design(const std::string& base_dir) const {
    std::string path = get("design");
    if (!base_dir.empty() && path.front() != '/') path = base_dir + "/" + path;
    CrossoverDesign d;
    d.sequences = parse_design_file(path);
    d.units_per_sequence = get_int("n", 1);
    const int L = get_int("L", 0);
    if (has("times")) {
        for (const auto& cell : split(get("times"), ','))
            d.times.push_back(parse_number(trim(cell), 0));
        d.t_domain = get_double("t_domain", d.times.empty() ? 1.0 : d.times.back());
    } else {
        if (L <= 0) throw ConfigError("config needs L or an explicit times list");
        for (int k = 1; k <= L; ++k) d.times.push_back(k);
        d.t_domain = get_double("t_domain", static_cast<double>(L));
    }
    d.validate();
    return d;
}

ModelSpec RunConfig::model_spec() const {
    ModelSpec spec;
    spec.family = Family::parse(get_or("family", "gaussian"));
    spec.correlation = CorrelationSpec::parse(get_or("correlation", "independence"));
    const std::string kind = get_or("basis.kind", "bspline");
    const double t_domain = get_double("t_domain", get_double("L", 1.0));
    if (kind == "bspline")
        spec.basis = BasisSpec::bspline(get_int("basis.order", 4), get_int("basis.knots", 2), t_domain);
    else if (kind == "fourier")
        spec.basis = BasisSpec::fourier(get_int("basis.harmonics", 1), t_domain);
    else
        throw ConfigError("unknown basis kind: " + kind);
    spec.lambda_time = get_double("lambda.time", 0.0);
    if (has("lambda.carry")) {
        for (const auto& cell : split(get("lambda.carry"), ','))
            spec.lambda_carry.push_back(parse_number(trim(cell), 0));
    }
    spec.penalty_order_time = get_int("penalty.time_order", -1);
    spec.penalty_order_carry = get_int("penalty.carry_order", -1);
    spec.max_iter = get_int("max_iter", 200);
    spec.tol = get_double("tol", 1e-6);
    spec.allow_rank_deficient = get_int("allow_rank_deficient", 0) != 0;
    return spec;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write file: " + path);
    for (std::size_t i = 0; i < header.size(); ++i)
        out << header[i] << (i + 1 < header.size() ? "," : "\n");
    for (const auto& row : rows)
        for (std::size_t i = 0; i < row.size(); ++i)
            out << row[i] << (i + 1 < row.size() ? "," : "\n");
}

std::pair<std::vector<std::string>, std::vector<std::vector<std::string>>>
read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty csv: " + path);
    auto header = split(trim(line), ',');
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty()) continue;
        rows.push_back(split(t, ','));
    }
    return {header, rows};
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

} // namespace pgee
