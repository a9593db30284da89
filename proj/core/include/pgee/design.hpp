#ifndef PGEE_DESIGN_HPP
#define PGEE_DESIGN_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pgee/errors.hpp"

namespace pgee {

/// Crossover layout: S sequences of P periods, n units per sequence,
/// L repeated measurements per unit-period on a shared time grid.
struct CrossoverDesign {
    std::vector<std::vector<std::string>> sequences;  // S rows of P labels
    int units_per_sequence = 1;                       // n
    std::vector<double> times;                        // L strictly increasing points
    double t_domain = 1.0;

    int n_sequences() const { return static_cast<int>(sequences.size()); }
    int n_periods() const { return sequences.empty() ? 0 : static_cast<int>(sequences.front().size()); }
    int n_obs_per_period() const { return static_cast<int>(times.size()); }
    int n_units_total() const { return units_per_sequence * n_sequences(); }

    /// Distinct treatment labels, lexicographic.
    std::vector<std::string> treatments() const;

    /// Throws InvalidDesign when the layout invariants do not hold.
    void validate() const;

    /// Uniform grid 1..L on [0, L], the layout used throughout the built-in
    /// simulations.
    static CrossoverDesign make(std::vector<std::vector<std::string>> seqs,
                                int n_per_sequence, int obs_per_period);
};

struct CarryoverPair {
    std::string from;
    std::string to;

    bool operator==(const CarryoverPair&) const = default;
    bool operator<(const CarryoverPair& o) const {
        return from < o.from || (from == o.from && to < o.to);
    }
    std::string label() const { return from + "->" + to; }
};

/// Indicator blocks of the design matrix before Kronecker expansion over the
/// within-period time grid. Rows are unit-periods: sequence-major, then unit,
/// then period.
struct IndicatorBlocks {
    Eigen::MatrixXd treatment;  // nSP x (D-1), reference = first label
    Eigen::MatrixXd period;     // nSP x (P-1), reference = period 1
    Eigen::MatrixXd carryover;  // nSP x C
    std::vector<CarryoverPair> pairs;
};

struct AssumptionDiagnostic {
    std::string id;  // "A1".."A5"
    bool pass = false;
    std::string detail;
};

/// Every ordered pair (a,b), a != b, realized in consecutive periods of some
/// sequence; lexicographic by (from, to).
std::vector<CarryoverPair> carryover_pairs(const CrossoverDesign& design);

IndicatorBlocks build_indicators(const CrossoverDesign& design);

/// Assumption checks A1-A3. `requested` defaults to the pairs realized by the
/// design; passing extra pairs lets A3 flag effects that never occur.
std::vector<AssumptionDiagnostic> validate_layout(
    const CrossoverDesign& design,
    const std::vector<CarryoverPair>& requested = {});

} // namespace pgee

#endif
