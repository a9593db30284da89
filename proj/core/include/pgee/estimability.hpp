#ifndef PGEE_ESTIMABILITY_HPP
#define PGEE_ESTIMABILITY_HPP

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pgee/basis.hpp"
#include "pgee/design.hpp"

namespace pgee {

/// X = [1 | T (x) 1_L | P (x) 1_L | 1_nP (x) Phi | C (x) Phi], rows ordered
/// sequence-major, unit, period, then the L within-period times.
struct FullDesignMatrix {
    Eigen::MatrixXd values;  // (nSPL) x q
    std::map<std::string, std::pair<int, int>> block_index;  // name -> (start, length)
    std::vector<CarryoverPair> pairs;
    Eigen::RowVectorXd basis_offsets;  // centering applied to Phi columns
    int q = 0;

    std::pair<int, int> block(const std::string& name) const;
};

struct EstimabilityReport {
    std::vector<AssumptionDiagnostic> assumption_results;  // A1..A5
    int rank_found = 0;
    int rank_required = 0;
    bool estimable = false;
    std::map<std::string, int> per_pair_active_counts;  // pair label -> active obs
    std::string note;
};

FullDesignMatrix assemble_design_matrix(const CrossoverDesign& design, const BasisSpec& basis);

EstimabilityReport check_estimability(const CrossoverDesign& design, const BasisSpec& basis);

} // namespace pgee

#endif
