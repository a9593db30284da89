#include "pgee/design.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace pgee {

std::vector<std::string> CrossoverDesign::treatments() const {
    std::set<std::string> labels;
    for (const auto& seq : sequences)
        for (const auto& t : seq) labels.insert(t);
    return {labels.begin(), labels.end()};
}

void CrossoverDesign::validate() const {
    if (sequences.empty()) throw InvalidDesign("design has no sequences");
    const int P = n_periods();
    if (P < 2) throw InvalidDesign("design needs at least 2 periods");
    for (std::size_t s = 0; s < sequences.size(); ++s) {
        if (static_cast<int>(sequences[s].size()) != P)
            throw InvalidDesign("sequence " + std::to_string(s + 1) + " has wrong length");
        for (const auto& t : sequences[s])
            if (t.empty())
                throw DuplicateTreatmentInSequencePeriod(
                    "empty treatment label in sequence " + std::to_string(s + 1));
    }
    if (static_cast<int>(treatments().size()) < 2)
        throw InvalidDesign("design needs at least 2 distinct treatments");
    if (units_per_sequence < 1) throw InvalidDesign("units_per_sequence must be positive");
    if (times.empty()) throw InvalidDesign("design needs at least one measurement time");
    if (t_domain <= 0) throw InvalidDesign("t_domain must be positive");
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (times[k] < 0 || times[k] > t_domain)
            throw InvalidDesign("measurement time outside [0, t_domain]");
        if (k > 0 && times[k] <= times[k - 1])
            throw InvalidDesign("measurement times must be strictly increasing");
    }
}

CrossoverDesign CrossoverDesign::make(std::vector<std::vector<std::string>> seqs,
                                      int n_per_sequence, int obs_per_period) {
    CrossoverDesign d;
    d.sequences = std::move(seqs);
    d.units_per_sequence = n_per_sequence;
    d.t_domain = static_cast<double>(obs_per_period);
    d.times.resize(obs_per_period);
    for (int k = 0; k < obs_per_period; ++k) d.times[k] = k + 1.0;
    return d;
}

std::vector<CarryoverPair> carryover_pairs(const CrossoverDesign& design) {
    std::set<CarryoverPair> pairs;
    for (const auto& seq : design.sequences)
        for (std::size_t j = 1; j < seq.size(); ++j)
            if (seq[j - 1] != seq[j]) pairs.insert({seq[j - 1], seq[j]});
    return {pairs.begin(), pairs.end()};
}

IndicatorBlocks build_indicators(const CrossoverDesign& design) {
    design.validate();
    const int S = design.n_sequences();
    const int P = design.n_periods();
    const int n = design.units_per_sequence;
    const auto labels = design.treatments();
    const int D = static_cast<int>(labels.size());
    const auto pairs = carryover_pairs(design);
    const int C = static_cast<int>(pairs.size());
    const int rows = n * S * P;

    std::map<std::string, int> treat_col;  // reference (first label) dropped
    for (int t = 1; t < D; ++t) treat_col[labels[t]] = t - 1;
    std::map<CarryoverPair, int> pair_col;
    for (int c = 0; c < C; ++c) pair_col[pairs[c]] = c;

    IndicatorBlocks blocks;
    blocks.treatment = Eigen::MatrixXd::Zero(rows, D - 1);
    blocks.period = Eigen::MatrixXd::Zero(rows, P - 1);
    blocks.carryover = Eigen::MatrixXd::Zero(rows, C);
    blocks.pairs = pairs;

    int row = 0;
    for (int s = 0; s < S; ++s) {
        for (int u = 0; u < n; ++u) {
            for (int j = 0; j < P; ++j, ++row) {
                const std::string& treat = design.sequences[s][j];
                if (auto it = treat_col.find(treat); it != treat_col.end())
                    blocks.treatment(row, it->second) = 1.0;
                if (j > 0) {
                    blocks.period(row, j - 1) = 1.0;
                    const std::string& prev = design.sequences[s][j - 1];
                    if (prev != treat)
                        blocks.carryover(row, pair_col.at({prev, treat})) = 1.0;
                }
            }
        }
    }
    return blocks;
}

std::vector<AssumptionDiagnostic> validate_layout(
    const CrossoverDesign& design, const std::vector<CarryoverPair>& requested) {
    std::vector<AssumptionDiagnostic> out;
    const int P = design.n_periods();
    const auto labels = design.treatments();

    // A1: every treatment in at least two different sequences.
    {
        AssumptionDiagnostic d{"A1", true, "each treatment appears in at least two sequences"};
        for (const auto& t : labels) {
            int count = 0;
            for (const auto& seq : design.sequences)
                if (std::find(seq.begin(), seq.end(), t) != seq.end()) ++count;
            if (count < 2) {
                d.pass = false;
                d.detail = "treatment " + t + " appears in only " + std::to_string(count) + " sequence(s)";
                break;
            }
        }
        out.push_back(d);
    }

    // A2: every treatment in more than one period, every period with more
    // than one treatment.
    {
        AssumptionDiagnostic d{"A2", true, "treatments span periods and periods span treatments"};
        for (const auto& t : labels) {
            std::set<int> periods;
            for (const auto& seq : design.sequences)
                for (int j = 0; j < P; ++j)
                    if (seq[j] == t) periods.insert(j);
            if (periods.size() < 2) {
                d.pass = false;
                d.detail = "treatment " + t + " appears in only one period";
                break;
            }
        }
        if (d.pass) {
            for (int j = 0; j < P; ++j) {
                std::set<std::string> in_period;
                for (const auto& seq : design.sequences) in_period.insert(seq[j]);
                if (in_period.size() < 2) {
                    d.pass = false;
                    d.detail = "period " + std::to_string(j + 1) + " has only one treatment";
                    break;
                }
            }
        }
        out.push_back(d);
    }

    // A3: every requested carry-over pair occurs in at least one unit-period.
    {
        AssumptionDiagnostic d{"A3", true, "every carry-over pair is realized"};
        const auto realized = carryover_pairs(design);
        const auto& want = requested.empty() ? realized : requested;
        for (const auto& p : want) {
            if (!std::binary_search(realized.begin(), realized.end(), p)) {
                d.pass = false;
                d.detail = "pair " + p.label() + " never occurs in the design";
                break;
            }
        }
        out.push_back(d);
    }
    return out;
}

} // namespace pgee
