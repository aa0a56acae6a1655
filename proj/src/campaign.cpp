#include "mabc/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#ifndef MABC_BUILD_ID
#define MABC_BUILD_ID "unknown"
#endif

namespace mabc::harness {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

void CampaignConfig::validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("invalid campaign config: " + what); };
    if (problems.empty()) fail("no problems selected");
    if (runs == 0) fail("runs must be at least 1");
    if (jobs == 0) fail("jobs must be at least 1");
    if (checkpoint_fractions.empty()) fail("no checkpoints");
    for (std::size_t k = 0; k < checkpoint_fractions.size(); ++k) {
        const double c = checkpoint_fractions[k];
        if (!(c > 0.0 && c <= 1.0)) fail("checkpoint fractions must lie in (0, 1]");
        if (k > 0 && !(c > checkpoint_fractions[k - 1])) fail("checkpoint fractions must be increasing");
    }
    mabc.validate();
    const auto fes = checkpoint_evaluations();
    for (std::size_t k = 1; k < fes.size(); ++k)
        if (fes[k] <= fes[k - 1]) fail("checkpoints collapse to the same evaluation count");
    if (fes.front() == 0) fail("first checkpoint rounds to zero evaluations");
    // Divisibility and D >= 2 are checked by the suite itself.
    for (auto id : problems) (void)bench::group_structure(id, dimension, group_size, [&] {
        std::vector<std::size_t> p(dimension);
        std::iota(p.begin(), p.end(), std::size_t{0});
        return p;
    }());
}

std::vector<std::uint64_t> CampaignConfig::checkpoint_evaluations() const {
    std::vector<std::uint64_t> fes;
    for (double c : checkpoint_fractions)
        fes.push_back(static_cast<std::uint64_t>(std::llround(c * static_cast<double>(mabc.max_evaluations))));
    return fes;
}

json to_json(const CampaignConfig& c) {
    json problems = json::array();
    for (auto id : c.problems) problems.push_back(id.name());
    return json{
        {"problems", problems},
        {"dim", c.dimension},
        {"group_size", c.group_size},
        {"runs", c.runs},
        {"seed", c.seed},
        {"data_seed", c.data_seed},
        {"max_fes", c.mabc.max_evaluations},
        {"np", c.mabc.population_size},
        {"cr", c.mabc.crossover_probability},
        {"ls_ratio", c.mabc.local_search_ratio},
        {"ls_budget", c.mabc.ls_budget},
        {"ls_subspace", c.mabc.ls_subspace},
        {"scout_limit", c.mabc.scout_limit},
        {"onlooker_rule", std::string(to_string(c.mabc.onlooker_rule))},
        {"ls_switch", std::string(to_string(c.mabc.switch_rule))},
        {"nma",
         {{"step_fraction", c.mabc.nma.step_fraction},
          {"reflection", c.mabc.nma.reflection},
          {"expansion", c.mabc.nma.expansion},
          {"contraction", c.mabc.nma.contraction},
          {"shrink", c.mabc.nma.shrink},
          {"spread_tolerance", c.mabc.nma.spread_tolerance}}},
        {"rwde",
         {{"initial_step_fraction", c.mabc.rwde.initial_step_fraction},
          {"max_fail", c.mabc.rwde.max_fail},
          {"min_step_fraction", c.mabc.rwde.min_step_fraction}}},
        {"checkpoints", c.checkpoint_fractions},
        {"stride", c.trace_stride},
        {"jobs", c.jobs},
        {"out", c.output_dir.string()},
        {"data_dir", c.data_dir ? json(c.data_dir->string()) : json(nullptr)},
    };
}

CampaignConfig config_from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    static const std::set<std::string> known{
        "problems", "dim",         "group_size",  "runs",     "seed",          "data_seed", "max_fes",
        "np",       "cr",          "ls_ratio",    "ls_budget", "ls_subspace",  "scout_limit", "onlooker_rule",
        "ls_switch", "nma",        "rwde",        "checkpoints", "stride",     "jobs",      "out",
        "data_dir", "build",       "checkpoint_fes", "format"};
    for (const auto& [key, _] : j.items())
        if (!known.contains(key)) throw std::invalid_argument("unknown config key '" + key + "'");

    CampaignConfig c;
    try {
        if (j.contains("problems")) {
            c.problems.clear();
            for (const auto& p : j.at("problems")) c.problems.push_back(bench::ProblemId::parse(p.get<std::string>()));
        }
        auto get = [&](const char* key, auto& field) {
            if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
        };
        get("dim", c.dimension);
        get("group_size", c.group_size);
        get("runs", c.runs);
        get("seed", c.seed);
        get("data_seed", c.data_seed);
        get("max_fes", c.mabc.max_evaluations);
        get("np", c.mabc.population_size);
        get("cr", c.mabc.crossover_probability);
        get("ls_ratio", c.mabc.local_search_ratio);
        get("ls_budget", c.mabc.ls_budget);
        get("ls_subspace", c.mabc.ls_subspace);
        get("scout_limit", c.mabc.scout_limit);
        if (j.contains("onlooker_rule")) c.mabc.onlooker_rule = parse_onlooker_rule(j.at("onlooker_rule").get<std::string>());
        if (j.contains("ls_switch")) c.mabc.switch_rule = parse_switch_rule(j.at("ls_switch").get<std::string>());
        if (j.contains("nma")) {
            const auto& n = j.at("nma");
            auto nget = [&](const char* key, double& field) {
                if (n.contains(key)) field = n.at(key).get<double>();
            };
            nget("step_fraction", c.mabc.nma.step_fraction);
            nget("reflection", c.mabc.nma.reflection);
            nget("expansion", c.mabc.nma.expansion);
            nget("contraction", c.mabc.nma.contraction);
            nget("shrink", c.mabc.nma.shrink);
            nget("spread_tolerance", c.mabc.nma.spread_tolerance);
        }
        if (j.contains("rwde")) {
            const auto& r = j.at("rwde");
            if (r.contains("initial_step_fraction")) c.mabc.rwde.initial_step_fraction = r.at("initial_step_fraction").get<double>();
            if (r.contains("max_fail")) c.mabc.rwde.max_fail = r.at("max_fail").get<int>();
            if (r.contains("min_step_fraction")) c.mabc.rwde.min_step_fraction = r.at("min_step_fraction").get<double>();
        }
        get("checkpoints", c.checkpoint_fractions);
        get("stride", c.trace_stride);
        get("jobs", c.jobs);
        if (j.contains("out")) c.output_dir = j.at("out").get<std::string>();
        if (j.contains("data_dir") && !j.at("data_dir").is_null()) c.data_dir = j.at("data_dir").get<std::string>();
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed config: ") + e.what());
    }
    return c;
}

CampaignConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::invalid_argument(path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

std::string build_id() { return MABC_BUILD_ID; }

std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.5e", v);
    return buf;
}

// ---------------------------------------------------------------------------
// CSV helpers
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double parse_real(const std::string& s) {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("not a number: '" + s + "'");
    return v;
}

std::uint64_t parse_count(const std::string& s) {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument("not an integer: '" + s + "'");
    return v;
}

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

std::string trace_name(const std::string& problem, std::uint32_t run) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_run%03u.csv", problem.c_str(), run);
    return buf;
}

}  // namespace

void write_trace_csv(const fs::path& path, const stats::RunRecord& record) {
    auto out = open_out(path);
    out << "evaluations,best_error\n";
    for (const auto& p : record.trace) out << p.evaluations << ',' << format_real(p.best_error) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<TracePoint> read_trace_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    if (strip_cr(line) != "evaluations,best_error") throw std::invalid_argument(path.string() + ": bad header");
    std::vector<TracePoint> points;
    while (std::getline(in, line)) {
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != 2) throw std::invalid_argument(path.string() + ": bad row");
        points.push_back({parse_count(cells[0]), parse_real(cells[1])});
    }
    return points;
}

static constexpr const char* kSummaryHeader = "problem,evaluations,best,median,worst,mean,std,runs";

void write_summary_csv(std::ostream& out, const stats::CampaignSummary& summary) {
    out << kSummaryHeader << '\n';
    for (const auto& r : summary.rows)
        out << r.problem_id << ',' << r.evaluations << ',' << format_real(r.best) << ',' << format_real(r.median)
            << ',' << format_real(r.worst) << ',' << format_real(r.mean) << ',' << format_real(r.std) << ','
            << r.runs << '\n';
}

stats::CampaignSummary read_summary_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || strip_cr(line) != kSummaryHeader)
        throw std::invalid_argument("summary CSV: unexpected header");
    stats::CampaignSummary summary;
    while (std::getline(in, line)) {
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto c = split_csv(line);
        if (c.size() != 8) throw std::invalid_argument("summary CSV: expected 8 columns: " + line);
        summary.rows.push_back({c[0], parse_count(c[1]), parse_real(c[2]), parse_real(c[3]), parse_real(c[4]),
                                parse_real(c[5]), parse_real(c[6]), parse_count(c[7])});
    }
    return summary;
}

// ---------------------------------------------------------------------------
// Convergence series
// ---------------------------------------------------------------------------

std::vector<ConvergenceRow> convergence_series(std::span<const stats::RunRecord> records, std::uint64_t stride) {
    if (records.empty()) throw std::invalid_argument("convergence series: no records");
    const auto& ref = records.front();
    std::set<std::uint64_t> checkpoints;
    for (const auto& c : ref.checkpoint_errors) checkpoints.insert(c.evaluations);
    for (const auto& r : records) {
        if (r.problem_id != ref.problem_id) throw std::invalid_argument("convergence series: mixed problems");
        if (r.trace.size() != ref.trace.size()) throw std::invalid_argument("convergence series: trace layouts differ");
    }

    std::vector<ConvergenceRow> rows;
    for (std::size_t k = 0; k < ref.trace.size(); ++k) {
        const std::uint64_t e = ref.trace[k].evaluations;
        const bool keep = (stride > 0 && e % stride == 0) || checkpoints.contains(e);
        if (!keep) continue;
        ConvergenceRow row{e, 0.0, ref.trace[k].best_error, ref.trace[k].best_error};
        for (const auto& r : records) {
            if (r.trace[k].evaluations != e) throw std::invalid_argument("convergence series: trace layouts differ");
            const double v = r.trace[k].best_error;
            row.mean += v;
            row.min = std::min(row.min, v);
            row.max = std::max(row.max, v);
        }
        row.mean /= static_cast<double>(records.size());
        rows.push_back(row);
    }
    return rows;
}

void emit_convergence(std::span<const stats::RunRecord> records, std::uint64_t stride, const fs::path& dir) {
    std::vector<std::string> problems;
    for (const auto& r : records)
        if (std::find(problems.begin(), problems.end(), r.problem_id) == problems.end()) problems.push_back(r.problem_id);
    for (const auto& problem : problems) {
        std::vector<stats::RunRecord> subset;
        for (const auto& r : records)
            if (r.problem_id == problem) subset.push_back(r);
        const auto rows = convergence_series(subset, stride);
        auto out = open_out(dir / ("convergence_" + problem + ".csv"));
        out << "evaluations,mean_best_error,min_best_error,max_best_error\n";
        for (const auto& row : rows)
            out << row.evaluations << ',' << format_real(row.mean) << ',' << format_real(row.min) << ','
                << format_real(row.max) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Campaign
// ---------------------------------------------------------------------------

CampaignResult run_campaign(const CampaignConfig& config, std::ostream* progress) {
    config.validate();
    const fs::path out_dir = config.output_dir;
    fs::create_directories(out_dir / "traces");

    std::vector<bench::BenchmarkProblem> problems;
    problems.reserve(config.problems.size());
    for (auto id : config.problems) {
        auto data = config.data_dir
                        ? bench::load_problem_data(id, config.dimension, config.group_size, *config.data_dir,
                                                   config.data_seed)
                        : bench::generate_problem_data(id, config.dimension, config.group_size, config.data_seed);
        problems.emplace_back(id, config.dimension, config.group_size, std::move(data));
    }

    const std::size_t tasks = problems.size() * config.runs;
    std::vector<stats::RunRecord> records(tasks);
    const auto checkpoints = config.checkpoint_evaluations();
    std::atomic<std::size_t> next{0};
    std::mutex guard;
    std::exception_ptr failure;

    auto worker = [&] {
        for (std::size_t t = next++; t < tasks; t = next++) {
            const auto& problem = problems[t / config.runs];
            const auto r = static_cast<std::uint32_t>(t % config.runs);
            try {
                RunOptions options{problem.id().name(), checkpoints, config.trace_stride};
                records[t] = run(problem, config.mabc, config.seed + r, options);
                if (progress) {
                    std::lock_guard lock(guard);
                    *progress << problem.id().name() << " run " << r << ": final error "
                              << format_real(records[t].final_error) << '\n';
                }
            } catch (...) {
                std::lock_guard lock(guard);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    {
        const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(config.jobs, tasks));
        std::vector<std::jthread> pool;
        for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
        worker();
    }
    if (failure) std::rethrow_exception(failure);

    // Single collector: files are written in task order after all runs finish.
    for (std::size_t t = 0; t < tasks; ++t)
        write_trace_csv(out_dir / "traces" / trace_name(records[t].problem_id, static_cast<std::uint32_t>(t % config.runs)),
                        records[t]);

    CampaignResult result;
    result.summary = stats::summarize(records);
    {
        auto out = open_out(out_dir / "summary.csv");
        write_summary_csv(out, result.summary);
    }
    emit_convergence(records, config.trace_stride, out_dir);

    json manifest = to_json(config);
    manifest["format"] = 1;
    manifest["build"] = build_id();
    manifest["checkpoint_fes"] = checkpoints;
    auto out = open_out(out_dir / "manifest.json");
    out << manifest.dump(2) << '\n';

    result.records = std::move(records);
    return result;
}

// ---------------------------------------------------------------------------
// Comparison
// ---------------------------------------------------------------------------

AlgorithmMeans means_from_summary(const std::string& name, const stats::CampaignSummary& summary,
                                  std::uint64_t evaluations) {
    AlgorithmMeans m{name, {}};
    for (const auto& problem : summary.problems()) {
        const auto* row = summary.find(problem, evaluations);
        if (!row)
            throw std::invalid_argument(name + ": no checkpoint at " + std::to_string(evaluations) +
                                        " evaluations for " + problem);
        m.means[problem] = row->mean;
    }
    if (m.means.empty()) throw std::invalid_argument(name + ": empty summary");
    return m;
}

std::vector<AlgorithmMeans> read_published_means(std::istream& in, std::uint64_t evaluations) {
    std::string line;
    if (!std::getline(in, line) || strip_cr(line) != "algorithm,problem,evaluations,mean")
        throw std::invalid_argument("published means: expected header 'algorithm,problem,evaluations,mean'");
    std::vector<AlgorithmMeans> out;
    std::set<std::string> seen;
    while (std::getline(in, line)) {
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto c = split_csv(line);
        if (c.size() != 4) throw std::invalid_argument("published means: expected 4 columns: " + line);
        seen.insert(c[0]);
        if (parse_count(c[2]) != evaluations) continue;
        auto it = std::find_if(out.begin(), out.end(), [&](const AlgorithmMeans& a) { return a.name == c[0]; });
        if (it == out.end()) it = out.insert(out.end(), AlgorithmMeans{c[0], {}});
        it->means[c[1]] = parse_real(c[3]);
    }
    for (const auto& name : seen)
        if (std::none_of(out.begin(), out.end(), [&](const AlgorithmMeans& a) { return a.name == name; }))
            throw std::invalid_argument("published means: " + name + " has no rows at " +
                                        std::to_string(evaluations) + " evaluations");
    return out;
}

ComparisonResult compare(const std::vector<AlgorithmMeans>& algorithms, double alpha) {
    if (algorithms.size() < 2) throw std::invalid_argument("compare: need at least two algorithms");
    std::set<std::string> names;
    for (const auto& a : algorithms)
        if (!names.insert(a.name).second) throw std::invalid_argument("compare: duplicate algorithm " + a.name);

    ComparisonResult result;
    for (const auto& [problem, _] : algorithms.front().means) result.problems.push_back(problem);
    std::sort(result.problems.begin(), result.problems.end(), stats::problem_less);
    for (const auto& a : algorithms) {
        result.algorithms.push_back(a.name);
        if (a.means.size() != result.problems.size())
            throw std::invalid_argument("compare: mismatched problem sets (" + a.name + ")");
        for (const auto& p : result.problems)
            if (!a.means.contains(p)) throw std::invalid_argument("compare: " + a.name + " lacks " + p);
    }

    std::vector<std::vector<double>> matrix;
    for (const auto& p : result.problems) {
        std::vector<double> row;
        for (const auto& a : algorithms) row.push_back(a.means.at(p));
        matrix.push_back(std::move(row));
    }
    if (algorithms.size() == 4) result.points = stats::build_comparison(result.algorithms, result.problems, matrix);
    result.friedman = stats::friedman_test(matrix, alpha);
    return result;
}

void write_comparison(const ComparisonResult& result, const fs::path& dir) {
    fs::create_directories(dir);
    if (result.points) {
        auto out = open_out(dir / "points.csv");
        out << "algorithm,I,II,III,IV,V,total\n";
        const auto& t = *result.points;
        for (std::size_t a = 0; a < t.algorithms.size(); ++a) {
            out << t.algorithms[a];
            for (int p : t.points[a]) out << ',' << p;
            out << ',' << t.totals[a] << '\n';
        }
    }
    {
        auto out = open_out(dir / "ranks.csv");
        out << "algorithm,mean_rank\n";
        for (std::size_t a = 0; a < result.algorithms.size(); ++a)
            out << result.algorithms[a] << ',' << format_real(result.friedman.mean_ranks[a]) << '\n';
    }
    auto out = open_out(dir / "friedman.csv");
    out << "problems,algorithms,statistic,df,alpha,critical_value,reject\n";
    out << result.problems.size() << ',' << result.algorithms.size() << ',' << format_real(result.friedman.statistic)
        << ',' << result.friedman.degrees_of_freedom << ',' << result.friedman.alpha << ','
        << format_real(result.friedman.critical_value) << ',' << (result.friedman.reject ? "true" : "false") << '\n';
}

// ---------------------------------------------------------------------------
// Self test
// ---------------------------------------------------------------------------

bool selftest(std::ostream& out) {
    bool all = true;
    auto check = [&](const std::string& name, auto&& body) {
        bool ok = false;
        std::string detail;
        try {
            ok = body(detail);
        } catch (const std::exception& e) {
            detail = e.what();
        }
        out << (ok ? "PASS " : "FAIL ") << name;
        if (!detail.empty()) out << " (" << detail << ')';
        out << '\n';
        all = all && ok;
    };

    check("optimum identity F1-F20 at D=100, m=5", [](std::string& detail) {
        double worst = 0.0;
        for (auto id : bench::ProblemId::all()) {
            const auto p = bench::compose_problem(id, 100, 5, 7);
            worst = std::max(worst, std::abs(p.value(p.optimum())));
        }
        detail = "max |f| = " + format_real(worst);
        return worst <= 1e-8;
    });
    check("rotation orthogonality", [](std::string& detail) {
        double worst = 0.0;
        RngStream rng(11);
        for (std::size_t m : {1u, 2u, 5u, 50u}) worst = std::max(worst, bench::generate_rotation(m, rng).orthogonality_error());
        detail = "max |R^T R - I| = " + format_real(worst);
        return worst <= 1e-10;
    });
    check("welford matches two-pass", [](std::string& detail) {
        RngStream rng(3);
        std::vector<double> xs(1000);
        stats::Welford w;
        for (double& x : xs) {
            x = rng.uniform();
            w.push(x);
        }
        const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / 1000.0;
        double ss = 0.0;
        for (double x : xs) ss += (x - mean) * (x - mean);
        const double err = std::max(std::abs(w.mean() - mean), std::abs(w.variance() - ss / 999.0));
        detail = "error " + format_real(err);
        return err <= 1e-12;
    });
    check("run determinism and budget", [](std::string& detail) {
        const auto p = bench::compose_problem(bench::ProblemId::from_number(10), 20, 5, 1);
        MabcConfig cfg;
        cfg.max_evaluations = 5000;
        cfg.local_search_ratio = 0.2;
        RunOptions opt{"F10", {1000, 5000}, 100};
        const auto a = run(p, cfg, 42, opt);
        const auto b = run(p, cfg, 42, opt);
        bool monotone = true;
        for (std::size_t k = 1; k < a.trace.size(); ++k) monotone = monotone && a.trace[k].best_error <= a.trace[k - 1].best_error;
        detail = "final error " + format_real(a.final_error);
        return a == b && monotone && a.trace.back().evaluations == 5000;
    });
    return all;
}

}  // namespace mabc::harness
