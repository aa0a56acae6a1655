#pragma once

// Experiment harness: campaigns over problems x seeds, CSV/JSON outputs and
// the rank-points / Friedman comparison. File layouts are described in
// OUTPUT.md.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "mabc/benchmarks.hpp"
#include "mabc/engine.hpp"
#include "mabc/stats.hpp"

namespace mabc::harness {

struct CampaignConfig {
    std::vector<bench::ProblemId> problems = bench::ProblemId::all();
    std::size_t dimension = 1000;
    std::size_t group_size = 50;
    std::uint32_t runs = 25;
    /// Run r uses seed + r.
    std::uint64_t seed = 1;
    /// Seeds shift vectors, permutations and rotations.
    std::uint64_t data_seed = 2012;
    MabcConfig mabc;
    /// Fractions of max_evaluations; the defaults give 1.2e5 / 6e5 / 3e6.
    std::vector<double> checkpoint_fractions{1.0 / 25.0, 1.0 / 5.0, 1.0};
    std::uint64_t trace_stride = 1000;
    unsigned jobs = 1;
    std::filesystem::path output_dir = "mabc-out";
    /// Optional directory of published suite data (see SUITE.md).
    std::optional<std::filesystem::path> data_dir;

    /// Throws std::invalid_argument before any run starts.
    void validate() const;
    std::vector<std::uint64_t> checkpoint_evaluations() const;
};

nlohmann::json to_json(const CampaignConfig& config);
/// Missing keys keep their defaults; unknown keys are rejected. The extra
/// keys written into a manifest ("build", "checkpoint_fes", "format") are accepted.
CampaignConfig config_from_json(const nlohmann::json& j);
CampaignConfig load_config(const std::filesystem::path& path);

/// Identifier of the build that produced the binary (git revision when known).
std::string build_id();

/// Six significant digits in scientific notation, e.g. "1.63000e-21".
std::string format_real(double v);

struct CampaignResult {
    /// Ordered by problem (as configured) then run index.
    std::vector<stats::RunRecord> records;
    stats::CampaignSummary summary;
};

/// Executes every (problem, run) pair, then writes traces/, summary.csv,
/// convergence_<id>.csv and manifest.json under config.output_dir.
CampaignResult run_campaign(const CampaignConfig& config, std::ostream* progress = nullptr);

void write_trace_csv(const std::filesystem::path& path, const stats::RunRecord& record);
std::vector<TracePoint> read_trace_csv(const std::filesystem::path& path);

void write_summary_csv(std::ostream& out, const stats::CampaignSummary& summary);
stats::CampaignSummary read_summary_csv(std::istream& in);

struct ConvergenceRow {
    std::uint64_t evaluations = 0;
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
};

/// Pointwise mean/min/max of the runs' best-error traces, keeping rows at
/// multiples of `stride` plus every checkpoint. All records must belong to
/// one problem and share their trace layout.
std::vector<ConvergenceRow> convergence_series(std::span<const stats::RunRecord> records, std::uint64_t stride);

/// Writes convergence_<problem>.csv into `dir` for each problem in `records`.
void emit_convergence(std::span<const stats::RunRecord> records, std::uint64_t stride,
                      const std::filesystem::path& dir);

/// Mean errors of one algorithm at a fixed evaluation count.
struct AlgorithmMeans {
    std::string name;
    std::map<std::string, double> means;  // problem id -> mean error
};

/// Throws std::invalid_argument when a problem lacks the requested checkpoint.
AlgorithmMeans means_from_summary(const std::string& name, const stats::CampaignSummary& summary,
                                  std::uint64_t evaluations);

/// Long-format table "algorithm,problem,evaluations,mean"; rows at other
/// evaluation counts are ignored. Throws if an algorithm has none left.
std::vector<AlgorithmMeans> read_published_means(std::istream& in, std::uint64_t evaluations);

struct ComparisonResult {
    std::vector<std::string> algorithms;
    std::vector<std::string> problems;
    /// Present when exactly four algorithms take part.
    std::optional<stats::ComparisonTable> points;
    stats::FriedmanResult friedman;
};

/// Throws std::invalid_argument for fewer than two algorithms, duplicate
/// names or mismatched problem sets.
ComparisonResult compare(const std::vector<AlgorithmMeans>& algorithms, double alpha = 0.05);

/// points.csv (when available), ranks.csv and friedman.csv under `dir`.
void write_comparison(const ComparisonResult& result, const std::filesystem::path& dir);

/// Fast invariant checks; prints one PASS/FAIL line each, returns overall status.
bool selftest(std::ostream& out);

}  // namespace mabc::harness
