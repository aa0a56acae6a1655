#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mabc/core.hpp"

namespace mabc::stats {

/// Incremental mean/variance (Knuth/Welford), mergeable (Chan et al.).
class Welford {
public:
    void push(double x);
    void merge(const Welford& other);

    std::uint64_t count() const { return count_; }
    double mean() const { return mean_; }
    /// Sample variance; 0 while fewer than two values were pushed.
    double variance() const { return count_ < 2 ? 0.0 : m2_ / static_cast<double>(count_ - 1); }
    double stddev() const;

private:
    std::uint64_t count_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

/// Outcome of one optimisation run.
struct RunRecord {
    std::string problem_id;
    std::uint64_t seed = 0;
    /// Best error at each configured checkpoint, in checkpoint order.
    std::vector<TracePoint> checkpoint_errors;
    double final_error = 0.0;
    /// Downsampled best-error series (trace marks plus checkpoints).
    std::vector<TracePoint> trace;

    friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

/// Table-style statistics for one (problem, checkpoint) cell.
struct SummaryRow {
    std::string problem_id;
    std::uint64_t evaluations = 0;
    double best = 0.0;
    /// Lower-middle element for even run counts.
    double median = 0.0;
    double worst = 0.0;
    double mean = 0.0;
    /// Sample standard deviation; 0 for a single run.
    double std = 0.0;
    std::uint64_t runs = 0;

    friend bool operator==(const SummaryRow&, const SummaryRow&) = default;
};

struct CampaignSummary {
    /// Ordered by problem (natural order, F2 before F10) then evaluations.
    std::vector<SummaryRow> rows;

    const SummaryRow* find(const std::string& problem_id, std::uint64_t evaluations) const;
    std::vector<std::string> problems() const;

    friend bool operator==(const CampaignSummary&, const CampaignSummary&) = default;
};

/// Natural ordering of problem ids ("F2" < "F10").
bool problem_less(const std::string& a, const std::string& b);

/// Throws std::invalid_argument on empty input or when runs of the same
/// problem disagree on their checkpoints.
CampaignSummary summarize(std::span<const RunRecord> records);

/// Points for the four-way scheme, smallest mean first: 25, 18, 15, 12.
/// Ties are broken by lexical order of the names. Throws
/// std::invalid_argument unless exactly four algorithms are given.
std::vector<int> rank_points(std::span<const double> mean_errors, std::span<const std::string> names);

/// 1-based ranks within one row, ties share their average rank.
std::vector<double> average_ranks(std::span<const double> row);

/// Upper chi-square quantile for df 1..10 at alpha 0.05 or 0.01.
/// Throws std::invalid_argument for anything else.
double chi_square_critical(int df, double alpha);

struct FriedmanResult {
    double statistic = 0.0;
    int degrees_of_freedom = 0;
    double alpha = 0.05;
    double critical_value = 0.0;
    bool reject = false;
    /// Mean rank per algorithm (lower is better).
    std::vector<double> mean_ranks;
};

/// Omnibus Friedman test. `errors[p][a]` is algorithm a's error on problem p.
/// Throws std::invalid_argument for fewer than 2 problems or algorithms,
/// ragged rows or non-finite entries.
FriedmanResult friedman_test(const std::vector<std::vector<double>>& errors, double alpha);

/// Problem-class columns I..V of the points table.
inline constexpr int kClassGroups = 5;
/// 0-based class group of an F-id (F1-F3 -> 0, ..., F19-F20 -> 4).
int class_group(const std::string& problem_id);

struct ComparisonTable {
    std::vector<std::string> algorithms;
    /// points[a][g]: points of algorithm a summed over problems in class group g.
    std::vector<std::array<int, kClassGroups>> points;
    std::vector<int> totals;
};

/// Applies rank_points per problem and sums by class group.
/// `means[p][a]` pairs with `problems[p]` and `algorithms[a]`.
ComparisonTable build_comparison(const std::vector<std::string>& algorithms,
                                 const std::vector<std::string>& problems,
                                 const std::vector<std::vector<double>>& means);

}  // namespace mabc::stats
