// Command-line front end: run, compare, bench-info, selftest.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mabc/campaign.hpp"

namespace {

using namespace mabc;
using harness::CampaignConfig;

std::vector<bench::ProblemId> parse_problem_list(const std::vector<std::string>& items) {
    std::vector<bench::ProblemId> ids;
    for (const auto& item : items) {
        // Accept "F1..F20" and "F3-F7" ranges as well as single ids.
        for (const std::string sep : {"..", "-"}) {
            const auto at = item.find(sep);
            if (at != std::string::npos && at > 0) {
                const int lo = bench::ProblemId::parse(item.substr(0, at)).number();
                const int hi = bench::ProblemId::parse(item.substr(at + sep.size())).number();
                if (lo > hi) throw std::invalid_argument("empty problem range " + item);
                for (int n = lo; n <= hi; ++n) ids.push_back(bench::ProblemId::from_number(n));
                goto next;
            }
        }
        ids.push_back(bench::ProblemId::parse(item));
    next:;
    }
    return ids;
}

struct RunFlags {
    std::string config;
    std::vector<std::string> problems;
    std::size_t dim = 0, group_size = 0;
    std::uint32_t runs = 0, np = 0, scout_limit = 0, ls_budget = 0, ls_subspace = 0;
    std::uint64_t seed = 0, data_seed = 0, max_fes = 0, stride = 0;
    double cr = 0, ls_ratio = 0;
    std::string onlooker_rule, ls_switch, out, data_dir;
    std::vector<double> checkpoints;
    unsigned jobs = 0;
    bool quiet = false;
};

void add_run_options(CLI::App& cmd, RunFlags& f) {
    cmd.add_option("--config", f.config, "JSON config (a previous manifest.json also works)");
    cmd.add_option("--problems", f.problems, "Problem ids, e.g. F1 F5 or F1..F20")->delimiter(',');
    cmd.add_option("--dim", f.dim, "Dimension D");
    cmd.add_option("--group-size", f.group_size, "Group size m");
    cmd.add_option("--runs", f.runs, "Runs per problem");
    cmd.add_option("--seed", f.seed, "Base seed; run r uses seed + r");
    cmd.add_option("--data-seed", f.data_seed, "Seed for shifts, permutations and rotations");
    cmd.add_option("--max-fes", f.max_fes, "Evaluation budget per run");
    cmd.add_option("--np", f.np, "Colony size");
    cmd.add_option("--cr", f.cr, "Crossover probability");
    cmd.add_option("--ls-ratio", f.ls_ratio, "Per-generation local search probability");
    cmd.add_option("--ls-budget", f.ls_budget, "Evaluations per local search call");
    cmd.add_option("--ls-subspace", f.ls_subspace, "Coordinates searched by the simplex");
    cmd.add_option("--scout-limit", f.scout_limit, "Trials before a source is abandoned");
    cmd.add_option("--onlooker-rule", f.onlooker_rule, "prose | literal")
        ->check(CLI::IsMember({"prose", "literal"}));
    cmd.add_option("--ls-switch", f.ls_switch, "equation | prose")->check(CLI::IsMember({"equation", "prose"}));
    cmd.add_option("--checkpoints", f.checkpoints, "Checkpoint fractions of the budget")->delimiter(',');
    cmd.add_option("--jobs", f.jobs, "Parallel runs");
    cmd.add_option("--out", f.out, "Output directory");
    cmd.add_option("--stride", f.stride, "Trace spacing in evaluations");
    cmd.add_option("--data-dir", f.data_dir, "Directory with published suite data files");
    cmd.add_flag("--quiet", f.quiet, "No per-run progress");
}

CampaignConfig resolve_config(const CLI::App& cmd, const RunFlags& f) {
    CampaignConfig c = f.config.empty() ? CampaignConfig{} : harness::load_config(f.config);
    auto set = [&](const char* flag, auto& field, const auto& value) {
        if (cmd.count(flag) > 0) field = value;
    };
    if (cmd.count("--problems") > 0) c.problems = parse_problem_list(f.problems);
    set("--dim", c.dimension, f.dim);
    set("--group-size", c.group_size, f.group_size);
    set("--runs", c.runs, f.runs);
    set("--seed", c.seed, f.seed);
    set("--data-seed", c.data_seed, f.data_seed);
    set("--max-fes", c.mabc.max_evaluations, f.max_fes);
    set("--np", c.mabc.population_size, f.np);
    set("--cr", c.mabc.crossover_probability, f.cr);
    set("--ls-ratio", c.mabc.local_search_ratio, f.ls_ratio);
    set("--ls-budget", c.mabc.ls_budget, f.ls_budget);
    set("--ls-subspace", c.mabc.ls_subspace, f.ls_subspace);
    set("--scout-limit", c.mabc.scout_limit, f.scout_limit);
    if (cmd.count("--onlooker-rule") > 0) c.mabc.onlooker_rule = parse_onlooker_rule(f.onlooker_rule);
    if (cmd.count("--ls-switch") > 0) c.mabc.switch_rule = parse_switch_rule(f.ls_switch);
    set("--checkpoints", c.checkpoint_fractions, f.checkpoints);
    set("--jobs", c.jobs, f.jobs);
    if (cmd.count("--out") > 0) c.output_dir = f.out;
    set("--stride", c.trace_stride, f.stride);
    if (cmd.count("--data-dir") > 0) c.data_dir = f.data_dir;
    return c;
}

int cmd_run(const CLI::App& cmd, const RunFlags& f) {
    const CampaignConfig config = resolve_config(cmd, f);
    config.validate();
    const auto result = harness::run_campaign(config, f.quiet ? nullptr : &std::cerr);
    harness::write_summary_csv(std::cout, result.summary);
    return 0;
}

struct CompareFlags {
    std::vector<std::string> summaries;
    std::string published;
    std::uint64_t fes = 3'000'000;
    double alpha = 0.05;
    std::string out = "mabc-compare";
};

int cmd_compare(const CompareFlags& f) {
    std::vector<harness::AlgorithmMeans> algorithms;
    if (!f.published.empty()) {
        std::ifstream in(f.published);
        if (!in) throw std::runtime_error("cannot open " + f.published);
        algorithms = harness::read_published_means(in, f.fes);
    }
    for (const auto& spec : f.summaries) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos || eq == 0) throw std::invalid_argument("--summary expects NAME=path, got " + spec);
        std::ifstream in(spec.substr(eq + 1));
        if (!in) throw std::runtime_error("cannot open " + spec.substr(eq + 1));
        algorithms.push_back(harness::means_from_summary(spec.substr(0, eq), harness::read_summary_csv(in), f.fes));
    }
    const auto result = harness::compare(algorithms, f.alpha);
    harness::write_comparison(result, f.out);

    if (result.points) {
        std::printf("%-10s %5s %5s %5s %5s %5s %6s\n", "algorithm", "I", "II", "III", "IV", "V", "total");
        for (std::size_t a = 0; a < result.points->algorithms.size(); ++a) {
            const auto& p = result.points->points[a];
            std::printf("%-10s %5d %5d %5d %5d %5d %6d\n", result.points->algorithms[a].c_str(), p[0], p[1], p[2],
                        p[3], p[4], result.points->totals[a]);
        }
    }
    for (std::size_t a = 0; a < result.algorithms.size(); ++a)
        std::printf("mean rank %-10s %.3f\n", result.algorithms[a].c_str(), result.friedman.mean_ranks[a]);
    std::printf("Friedman statistic %.4f, df %d, critical %.4f at alpha %.2f: %s\n", result.friedman.statistic,
                result.friedman.degrees_of_freedom, result.friedman.critical_value, result.friedman.alpha,
                result.friedman.reject ? "reject" : "no rejection");
    return 0;
}

int cmd_bench_info(std::size_t dim, std::size_t group_size) {
    std::printf("%-4s %-19s %-12s %-10s %-7s %-16s %s\n", "id", "class", "base", "remainder", "rotated", "bounds",
                "groups");
    for (auto id : bench::ProblemId::all()) {
        const auto info = bench::problem_info(id);
        const auto b = bench::problem_bounds(id);
        std::string groups = "-";
        try {
            std::vector<std::size_t> identity(dim);
            for (std::size_t k = 0; k < dim; ++k) identity[k] = k;
            groups = std::to_string(bench::group_structure(id, dim, group_size, identity).group_count);
        } catch (const std::invalid_argument&) {
            groups = "invalid";
        }
        const bool has_remainder = info.separability == bench::SeparabilityClass::SingleGroup ||
                                   info.separability == bench::SeparabilityClass::HalfGroups;
        char bounds[32];
        std::snprintf(bounds, sizeof bounds, "[%g, %g]", b.lower, b.upper);
        std::printf("%-4s %-19s %-12s %-10s %-7s %-16s %s\n", id.name().c_str(),
                    std::string(bench::to_string(info.separability)).c_str(),
                    std::string(bench::to_string(info.base)).c_str(),
                    has_remainder ? std::string(bench::to_string(info.remainder)).c_str() : "-",
                    info.rotated ? "yes" : "no", bounds, groups.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Memetic artificial bee colony optimiser and LSGO benchmark harness"};
    app.require_subcommand(1);
    app.set_version_flag("--version", harness::build_id());

    RunFlags run_flags;
    auto* run = app.add_subcommand("run", "Run a campaign over problems x seeds");
    add_run_options(*run, run_flags);

    CompareFlags cmp;
    auto* compare = app.add_subcommand("compare", "Rank-points table and Friedman test over mean errors");
    compare->add_option("--summary", cmp.summaries, "NAME=summary.csv (repeatable)");
    compare->add_option("--published", cmp.published, "Long-format CSV algorithm,problem,evaluations,mean");
    compare->add_option("--fes", cmp.fes, "Checkpoint to compare at");
    compare->add_option("--alpha", cmp.alpha, "Significance level (0.05 or 0.01)");
    compare->add_option("--out", cmp.out, "Output directory");

    std::size_t info_dim = 1000, info_m = 50;
    auto* info = app.add_subcommand("bench-info", "Print suite metadata");
    info->add_option("--dim", info_dim, "Dimension D");
    info->add_option("--group-size", info_m, "Group size m");

    auto* self = app.add_subcommand("selftest", "Fast invariant checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*run) return cmd_run(*run, run_flags);
        if (*compare) return cmd_compare(cmp);
        if (*info) return cmd_bench_info(info_dim, info_m);
        if (*self) return harness::selftest(std::cout) ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
