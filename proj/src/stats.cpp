#include "mabc/stats.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "mabc/benchmarks.hpp"

namespace mabc::stats {

void Welford::push(double x) {
    ++count_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (x - mean_);
}

void Welford::merge(const Welford& other) {
    if (other.count_ == 0) return;
    if (count_ == 0) {
        *this = other;
        return;
    }
    const double n_a = static_cast<double>(count_);
    const double n_b = static_cast<double>(other.count_);
    const double n = n_a + n_b;
    const double delta = other.mean_ - mean_;
    mean_ += delta * n_b / n;
    m2_ += other.m2_ + delta * delta * n_a * n_b / n;
    count_ += other.count_;
}

double Welford::stddev() const { return std::sqrt(variance()); }

namespace {

struct NaturalKey {
    std::string prefix;
    long number = -1;
};

NaturalKey natural_key(const std::string& id) {
    std::size_t split = id.size();
    while (split > 0 && std::isdigit(static_cast<unsigned char>(id[split - 1]))) --split;
    NaturalKey key{id.substr(0, split), -1};
    if (split < id.size() && id.size() - split < 10) key.number = std::stol(id.substr(split));
    else key.prefix = id;
    return key;
}

}  // namespace

bool problem_less(const std::string& a, const std::string& b) {
    const NaturalKey ka = natural_key(a), kb = natural_key(b);
    if (ka.prefix != kb.prefix) return ka.prefix < kb.prefix;
    if (ka.number != kb.number) return ka.number < kb.number;
    return a < b;
}

const SummaryRow* CampaignSummary::find(const std::string& problem_id, std::uint64_t evaluations) const {
    for (const auto& row : rows)
        if (row.problem_id == problem_id && row.evaluations == evaluations) return &row;
    return nullptr;
}

std::vector<std::string> CampaignSummary::problems() const {
    std::vector<std::string> ids;
    for (const auto& row : rows)
        if (ids.empty() || ids.back() != row.problem_id) ids.push_back(row.problem_id);
    return ids;
}

CampaignSummary summarize(std::span<const RunRecord> records) {
    if (records.empty()) throw std::invalid_argument("summarize: no run records");

    auto cmp = [](const std::string& a, const std::string& b) { return problem_less(a, b); };
    std::map<std::string, std::vector<const RunRecord*>, decltype(cmp)> by_problem(cmp);
    for (const auto& r : records) by_problem[r.problem_id].push_back(&r);

    CampaignSummary summary;
    for (const auto& [problem, runs] : by_problem) {
        const auto& reference = runs.front()->checkpoint_errors;
        for (const RunRecord* r : runs) {
            if (r->checkpoint_errors.size() != reference.size())
                throw std::invalid_argument("summarize: runs of " + problem + " disagree on checkpoints");
            for (std::size_t c = 0; c < reference.size(); ++c)
                if (r->checkpoint_errors[c].evaluations != reference[c].evaluations)
                    throw std::invalid_argument("summarize: runs of " + problem + " disagree on checkpoints");
        }
        for (std::size_t c = 0; c < reference.size(); ++c) {
            std::vector<double> values;
            values.reserve(runs.size());
            for (const RunRecord* r : runs) values.push_back(r->checkpoint_errors[c].best_error);
            std::sort(values.begin(), values.end());

            // Two-pass mean/std over the sorted values keeps the result
            // independent of record order.
            const double n = static_cast<double>(values.size());
            const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
            double ss = 0.0;
            for (double v : values) ss += (v - mean) * (v - mean);

            SummaryRow row;
            row.problem_id = problem;
            row.evaluations = reference[c].evaluations;
            row.best = values.front();
            row.median = values[(values.size() - 1) / 2];
            row.worst = values.back();
            row.mean = mean;
            row.std = values.size() < 2 ? 0.0 : std::sqrt(ss / (n - 1.0));
            row.runs = values.size();
            summary.rows.push_back(std::move(row));
        }
    }
    return summary;
}

std::vector<int> rank_points(std::span<const double> mean_errors, std::span<const std::string> names) {
    static constexpr int kPoints[4] = {25, 18, 15, 12};
    if (mean_errors.size() != 4 || names.size() != 4)
        throw std::invalid_argument("rank points: the 25/18/15/12 scheme needs exactly four algorithms");
    std::array<std::size_t, 4> order{0, 1, 2, 3};
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (mean_errors[a] != mean_errors[b]) return mean_errors[a] < mean_errors[b];
        return names[a] < names[b];
    });
    std::vector<int> points(4);
    for (std::size_t rank = 0; rank < 4; ++rank) points[order[rank]] = kPoints[rank];
    return points;
}

std::vector<double> average_ranks(std::span<const double> row) {
    std::vector<std::size_t> order(row.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return row[a] < row[b]; });
    std::vector<double> ranks(row.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && row[order[j + 1]] == row[order[i]]) ++j;
        const double shared = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
        i = j + 1;
    }
    return ranks;
}

double chi_square_critical(int df, double alpha) {
    static constexpr double k05[10] = {3.841459, 5.991465, 7.814728, 9.487729, 11.070498,
                                       12.591587, 14.067140, 15.507313, 16.918978, 18.307038};
    static constexpr double k01[10] = {6.634897, 9.210340, 11.344867, 13.276704, 15.086272,
                                       16.811894, 18.475307, 20.090235, 21.665994, 23.209251};
    if (df < 1 || df > 10) throw std::invalid_argument("chi-square table covers df 1..10 only");
    if (alpha == 0.05) return k05[df - 1];
    if (alpha == 0.01) return k01[df - 1];
    throw std::invalid_argument("chi-square table covers alpha 0.05 and 0.01 only");
}

FriedmanResult friedman_test(const std::vector<std::vector<double>>& errors, double alpha) {
    const std::size_t n = errors.size();
    if (n < 2) throw std::invalid_argument("Friedman test needs at least two problems");
    const std::size_t k = errors.front().size();
    if (k < 2) throw std::invalid_argument("Friedman test needs at least two algorithms");
    for (const auto& row : errors) {
        if (row.size() != k) throw std::invalid_argument("Friedman test: ragged error matrix");
        for (double v : row)
            if (!std::isfinite(v)) throw std::invalid_argument("Friedman test: non-finite entry");
    }

    FriedmanResult result;
    result.alpha = alpha;
    result.degrees_of_freedom = static_cast<int>(k - 1);
    result.critical_value = chi_square_critical(result.degrees_of_freedom, alpha);
    result.mean_ranks.assign(k, 0.0);
    for (const auto& row : errors) {
        const auto ranks = average_ranks(row);
        for (std::size_t a = 0; a < k; ++a) result.mean_ranks[a] += ranks[a];
    }
    double sum_sq = 0.0;
    for (double& r : result.mean_ranks) {
        r /= static_cast<double>(n);
        sum_sq += r * r;
    }
    const double kk = static_cast<double>(k);
    const double nn = static_cast<double>(n);
    result.statistic = 12.0 * nn / (kk * (kk + 1.0)) * (sum_sq - kk * (kk + 1.0) * (kk + 1.0) / 4.0);
    // Exact ties can leave a tiny negative residue.
    if (std::abs(result.statistic) < 1e-9) result.statistic = 0.0;
    result.reject = result.statistic > result.critical_value;
    return result;
}

int class_group(const std::string& problem_id) {
    const auto id = bench::ProblemId::parse(problem_id);
    return static_cast<int>(bench::problem_info(id).separability);
}

ComparisonTable build_comparison(const std::vector<std::string>& algorithms,
                                 const std::vector<std::string>& problems,
                                 const std::vector<std::vector<double>>& means) {
    if (means.size() != problems.size()) throw std::invalid_argument("comparison: one row per problem expected");
    ComparisonTable table;
    table.algorithms = algorithms;
    table.points.assign(algorithms.size(), {});
    table.totals.assign(algorithms.size(), 0);
    for (std::size_t p = 0; p < problems.size(); ++p) {
        const auto pts = rank_points(means[p], algorithms);
        const int g = class_group(problems[p]);
        for (std::size_t a = 0; a < algorithms.size(); ++a) {
            table.points[a][static_cast<std::size_t>(g)] += pts[a];
            table.totals[a] += pts[a];
        }
    }
    return table;
}

}  // namespace mabc::stats
