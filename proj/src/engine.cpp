#include "mabc/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mabc {

std::string_view to_string(OnlookerRule r) {
    return r == OnlookerRule::ProseFaithful ? "prose" : "literal";
}

std::string_view to_string(SwitchRule r) { return r == SwitchRule::Equation ? "equation" : "prose"; }

OnlookerRule parse_onlooker_rule(std::string_view text) {
    if (text == "prose") return OnlookerRule::ProseFaithful;
    if (text == "literal") return OnlookerRule::LiteralEq6;
    throw std::invalid_argument("onlooker rule must be 'prose' or 'literal', got '" + std::string(text) + "'");
}

SwitchRule parse_switch_rule(std::string_view text) {
    if (text == "equation") return SwitchRule::Equation;
    if (text == "prose") return SwitchRule::Prose;
    throw std::invalid_argument("switch rule must be 'equation' or 'prose', got '" + std::string(text) + "'");
}

void MabcConfig::validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("invalid MABC config: " + what); };
    if (population_size < 4) fail("population size must be at least 4");
    if (!(crossover_probability >= 0.0 && crossover_probability <= 1.0)) fail("CR must lie in [0, 1]");
    if (!(local_search_ratio >= 0.0 && local_search_ratio <= 1.0)) fail("local search ratio must lie in [0, 1]");
    if (scout_limit == 0) fail("scout limit must be positive");
    if (ls_budget == 0) fail("local search budget must be positive");
    if (ls_subspace < 2) fail("simplex subspace must have at least 2 coordinates");
    if (max_evaluations < population_size) fail("budget smaller than the population");
}

void DiversityTracker::push(double psi) {
    psi_ = psi;
    stats_.push(psi);
}

void Colony::refresh_best() {
    std::size_t k = 0;
    for (std::size_t i = 1; i < members.size(); ++i)
        if (members[i].fitness < members[k].fitness) k = i;
    if (members[k].fitness <= best.fitness || best.position.empty()) {
        best = members[k];
        best_index = k;
    }
}

namespace {

std::vector<double> random_position(const Problem& problem, RandomSource& rng) {
    const Bounds b = problem.bounds();
    std::vector<double> x(problem.dimension());
    for (double& v : x) v = rng.uniform() * (b.upper - b.lower) + b.lower;
    return x;
}

/// In-place greedy replacement; the incumbent is untouched if evaluation throws.
void greedy_replace(Solution& incumbent, std::vector<double>& trial, const Problem& problem, BudgetLedger& ledger) {
    const double f = evaluate(problem, trial, ledger);
    if (f <= incumbent.fitness) {
        incumbent.position.swap(trial);
        incumbent.fitness = f;
        incumbent.trial_counter = 0;
    } else {
        ++incumbent.trial_counter;
    }
}

}  // namespace

Colony init_colony(const Problem& problem, const MabcConfig& config, BudgetLedger& ledger, RandomSource& rng) {
    if (ledger.remaining() < config.population_size) throw BudgetExhausted{};
    Colony colony;
    colony.members.resize(config.population_size);
    for (auto& m : colony.members) m.position = random_position(problem, rng);
    for (auto& m : colony.members) m.fitness = evaluate(problem, m.position, ledger);
    colony.refresh_best();
    return colony;
}

std::vector<std::size_t> draw_partners(std::size_t np, std::size_t exclude, std::size_t count, RandomSource& rng) {
    if (np < count + 1) throw std::invalid_argument("population too small for the requested partners");
    std::vector<std::size_t> picked;
    picked.reserve(count);
    while (picked.size() < count) {
        const std::size_t r = rng.index(np);
        if (r == exclude || std::find(picked.begin(), picked.end(), r) != picked.end()) continue;
        picked.push_back(r);
    }
    return picked;
}

std::vector<double> mutate_rand1(const Colony& colony, std::size_t i, RandomSource& rng, const EngineHooks* hooks) {
    const auto r = draw_partners(colony.members.size(), i, 3, rng);
    if (hooks && hooks->on_partners) hooks->on_partners(i, r);
    const auto& x1 = colony.members[r[0]].position;
    const auto& x2 = colony.members[r[1]].position;
    const auto& x3 = colony.members[r[2]].position;
    std::vector<double> v(x1.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = x1[j] + (x2[j] - x3[j]);
    return v;
}

std::vector<double> mutate_current_to_best(const Colony& colony, std::size_t i, RandomSource& rng,
                                           const EngineHooks* hooks) {
    const auto r = draw_partners(colony.members.size(), i, 2, rng);
    if (hooks && hooks->on_partners) hooks->on_partners(i, r);
    const auto& xi = colony.members[i].position;
    const auto& xb = colony.best.position;
    const auto& x1 = colony.members[r[0]].position;
    const auto& x2 = colony.members[r[1]].position;
    std::vector<double> v(xi.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = xi[j] + (xb[j] - xi[j]) + (x1[j] - x2[j]);
    return v;
}

std::vector<double> crossover(std::span<const double> target, std::span<const double> donor, double cr,
                              Bounds bounds, RandomSource& rng) {
    if (target.size() != donor.size()) throw std::invalid_argument("crossover: length mismatch");
    const std::size_t dim = target.size();
    const std::size_t forced = rng.index(dim);
    std::vector<double> u(target.begin(), target.end());
    for (std::size_t j = 0; j < dim; ++j) {
        const bool take = rng.uniform() <= cr || j == forced;
        if (take) u[j] = std::clamp(donor[j], bounds.lower, bounds.upper);
    }
    return u;
}

Solution select_greedy(const Solution& incumbent, std::vector<double> trial, const Problem& problem,
                       BudgetLedger& ledger) {
    Solution out = incumbent;
    greedy_replace(out, trial, problem, ledger);
    return out;
}

void employed_phase(Colony& colony, const Problem& problem, const MabcConfig& config, BudgetLedger& ledger,
                    RandomSource& rng, const EngineHooks* hooks) {
    const Bounds bounds = problem.bounds();
    try {
        for (std::size_t i = 0; i < colony.members.size(); ++i) {
            auto donor = mutate_rand1(colony, i, rng, hooks);
            auto trial = crossover(colony.members[i].position, donor, config.crossover_probability, bounds, rng);
            if (hooks && hooks->on_crossover) hooks->on_crossover(colony.members[i].position, donor, trial);
            greedy_replace(colony.members[i], trial, problem, ledger);
        }
    } catch (const BudgetExhausted&) {
        colony.refresh_best();
        throw;
    }
    colony.refresh_best();
}

double onlooker_probability(const Colony& colony, std::size_t i) {
    double f_best = colony.members.front().fitness;
    double f_worst = f_best;
    for (const auto& m : colony.members) {
        f_best = std::min(f_best, m.fitness);
        f_worst = std::max(f_worst, m.fitness);
    }
    if (f_best == f_worst) return 1.0;
    return (colony.members[i].fitness - f_worst) / (f_best - f_worst);
}

std::uint64_t onlooker_phase(Colony& colony, const Problem& problem, const MabcConfig& config,
                             BudgetLedger& ledger, RandomSource& rng, const EngineHooks* hooks) {
    const Bounds bounds = problem.bounds();
    const std::size_t np = colony.members.size();
    std::uint64_t placements = 0;
    std::size_t idle = 0;
    std::size_t i = 0;
    try {
        while (placements < np && idle < np) {
            const double q = onlooker_probability(colony, i);
            const double r0 = rng.uniform();
            const bool visit = config.onlooker_rule == OnlookerRule::ProseFaithful ? r0 < q : q < r0;
            if (visit) {
                auto donor = mutate_current_to_best(colony, i, rng, hooks);
                auto trial = crossover(colony.members[i].position, donor, config.crossover_probability, bounds, rng);
                if (hooks && hooks->on_crossover) hooks->on_crossover(colony.members[i].position, donor, trial);
                greedy_replace(colony.members[i], trial, problem, ledger);
                colony.refresh_best();
                ++placements;
                idle = 0;
            } else {
                ++idle;
            }
            i = (i + 1) % np;
        }
    } catch (const BudgetExhausted&) {
        colony.refresh_best();
        throw;
    }
    return placements;
}

double fitness_diversity(const Colony& colony) {
    if (colony.members.empty()) throw std::invalid_argument("fitness diversity of an empty colony");
    double f_best = colony.members.front().fitness;
    double f_worst = f_best;
    double sum = 0.0;
    for (const auto& m : colony.members) {
        f_best = std::min(f_best, m.fitness);
        f_worst = std::max(f_worst, m.fitness);
        sum += m.fitness;
    }
    if (f_best == f_worst) return 1.0;
    const double f_avg = sum / static_cast<double>(colony.members.size());
    const double psi = 1.0 - std::abs((f_avg - f_best) / (f_worst - f_best));
    return std::clamp(psi, 0.0, 1.0);
}

double balance_probability(const DiversityTracker& tracker) {
    const double sigma = tracker.stddev();
    if (tracker.count() == 0 || sigma == 0.0) return 1.0;
    const double p = std::exp(-(tracker.psi() - tracker.mean()) / (2.0 * sigma * sigma));
    return std::clamp(p, 0.0, 1.0);
}

LocalSearchKind choose_local_search(double p, double draw, SwitchRule rule) {
    const bool nelder_mead = rule == SwitchRule::Equation ? draw > p : draw < p;
    return nelder_mead ? LocalSearchKind::NelderMead : LocalSearchKind::RandomWalk;
}

LocalImproveResult local_improve_best(Colony& colony, const Problem& problem, const MabcConfig& config,
                                      BudgetLedger& ledger, RandomSource& rng, const EngineHooks* hooks) {
    const double psi = fitness_diversity(colony);
    colony.diversity.push(psi);

    LocalImproveResult result;
    if (!(rng.uniform() < config.local_search_ratio)) return result;

    const double p = hooks && hooks->override_balance ? hooks->override_balance(psi)
                                                      : balance_probability(colony.diversity);
    result.ran = true;
    result.kind = choose_local_search(p, rng.uniform(), config.switch_rule);

    // The simplex needs at least a 2-d subspace and one evaluation per vertex.
    const std::size_t subspace = std::min<std::size_t>(
        {config.ls_subspace, problem.dimension(), config.ls_budget > 0 ? config.ls_budget - 1u : 0u});
    if (result.kind == LocalSearchKind::NelderMead && subspace < 2) result.kind = LocalSearchKind::RandomWalk;

    const std::uint64_t before = ledger.used();
    const ls::LsOutcome outcome =
        result.kind == LocalSearchKind::NelderMead
            ? ls::nma_search(colony.best, problem, config.ls_budget, subspace, rng, ledger, config.nma)
            : ls::rwde_search(colony.best, problem, config.ls_budget, rng, ledger, config.rwde);
    result.evaluations = ledger.used() - before;

    if (outcome.improved_fitness < colony.best.fitness) {
        Solution improved{outcome.improved_position, outcome.improved_fitness, 0};
        colony.members[colony.best_index] = improved;
        colony.best = std::move(improved);
        result.improved = true;
    }
    return result;
}

std::uint64_t scout_phase(Colony& colony, const Problem& problem, const MabcConfig& config, BudgetLedger& ledger,
                          RandomSource& rng) {
    std::uint64_t scouted = 0;
    try {
        for (std::size_t i = 0; i < colony.members.size(); ++i) {
            if (i == colony.best_index || colony.members[i].trial_counter < config.scout_limit) continue;
            auto x = random_position(problem, rng);
            const double f = evaluate(problem, x, ledger);
            colony.members[i] = Solution{std::move(x), f, 0};
            ++scouted;
        }
    } catch (const BudgetExhausted&) {
        colony.refresh_best();
        throw;
    }
    colony.refresh_best();
    return scouted;
}

stats::RunRecord run(const Problem& problem, const MabcConfig& config, std::uint64_t seed,
                     const RunOptions& options, const EngineHooks* hooks) {
    config.validate();
    const std::uint64_t max = config.max_evaluations;

    std::vector<std::uint64_t> marks{config.population_size};
    if (options.trace_stride > 0)
        for (std::uint64_t e = options.trace_stride; e <= max; e += options.trace_stride) marks.push_back(e);
    marks.push_back(max);

    BudgetLedger ledger(max, options.checkpoints, std::move(marks));
    RngStream rng(seed);
    Colony colony = init_colony(problem, config, ledger, rng);

    try {
        for (;;) {
            GenerationReport report;
            report.generation = colony.generation;

            std::uint64_t mark = ledger.used();
            employed_phase(colony, problem, config, ledger, rng, hooks);
            report.employed_evaluations = ledger.used() - mark;

            mark = ledger.used();
            report.onlooker_placements = onlooker_phase(colony, problem, config, ledger, rng, hooks);
            report.onlooker_evaluations = ledger.used() - mark;

            const auto local = local_improve_best(colony, problem, config, ledger, rng, hooks);
            report.local_search_ran = local.ran;
            report.local_search_kind = local.kind;
            report.local_evaluations = local.evaluations;

            mark = ledger.used();
            report.scouted = scout_phase(colony, problem, config, ledger, rng);
            report.scout_evaluations = ledger.used() - mark;

            report.psi = colony.diversity.psi();
            report.psi_mean = colony.diversity.mean();
            report.psi_variance = colony.diversity.variance();
            report.best_fitness = colony.best.fitness;
            ++colony.generation;
            if (hooks && hooks->on_generation) hooks->on_generation(report);
            if (ledger.exhausted()) break;
        }
    } catch (const BudgetExhausted&) {
    }

    stats::RunRecord record;
    record.problem_id = options.problem_id;
    record.seed = seed;
    record.checkpoint_errors = ledger.checkpoint_errors();
    record.final_error = ledger.best_error();
    record.trace = ledger.trace();
    return record;
}

}  // namespace mabc
