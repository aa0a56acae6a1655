#pragma once

// Memetic artificial bee colony engine.
//
// One generation runs four phases in a fixed order: employed bees (rand/1
// donor, multi-dimension crossover, greedy selection), onlooker bees
// (current-to-best/1 donor on sources chosen by a nectar roulette), local
// improvement of the best food source (Nelder-Mead or random walk, picked by
// a fitness-diversity rule) and scouts.
//
// Random draws are taken from the run's stream in this order:
//   init      for each member, for each coordinate: uniform
//   employed  for each member: partner indices r1, r2, r3 (rejection on
//             collisions), forced coordinate, then one uniform per coordinate
//   onlooker  per scanned source: r0; on a placement: r1, r2, forced
//             coordinate, one uniform per coordinate
//   local     gate uniform (always drawn); if the gate opens: switch uniform,
//             then the local search's own draws
//   scouts    for each abandoned member in index order: one uniform per coordinate

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "mabc/core.hpp"
#include "mabc/localsearch.hpp"
#include "mabc/stats.hpp"

namespace mabc {

/// Which comparison admits an onlooker to source i.
enum class OnlookerRule {
    ProseFaithful,  // visit when rand < q_i: richer sources get more onlookers
    LiteralEq6,     // visit when q_i < rand, as the donor equation is printed
};

/// Polarity of the Nelder-Mead / random-walk switch.
enum class SwitchRule {
    Equation,  // Nelder-Mead when rand > p(psi)
    Prose,     // Nelder-Mead when rand < p(psi), i.e. when p is large
};

enum class LocalSearchKind { NelderMead, RandomWalk };

std::string_view to_string(OnlookerRule r);
std::string_view to_string(SwitchRule r);
OnlookerRule parse_onlooker_rule(std::string_view text);  // "prose" | "literal"
SwitchRule parse_switch_rule(std::string_view text);      // "equation" | "prose"

struct MabcConfig {
    std::uint32_t population_size = 20;
    double crossover_probability = 0.01;
    /// Per-generation probability of improving the best food source.
    double local_search_ratio = 0.006;
    std::uint32_t scout_limit = 200;
    std::uint64_t max_evaluations = 3'000'000;
    OnlookerRule onlooker_rule = OnlookerRule::ProseFaithful;
    SwitchRule switch_rule = SwitchRule::Equation;
    /// Evaluations granted to one local-search invocation.
    std::uint32_t ls_budget = 100;
    /// Coordinates the simplex search works on (capped at D).
    std::uint32_t ls_subspace = 10;
    ls::NmaParams nma;
    ls::RwdeParams rwde;

    /// Throws std::invalid_argument on NP < 4, probabilities outside [0,1],
    /// zero limits/budgets or a budget below NP.
    void validate() const;
};

/// Running statistics of the fitness-diversity metric.
class DiversityTracker {
public:
    void push(double psi);

    double psi() const { return psi_; }
    double mean() const { return stats_.mean(); }
    /// Sample variance of the observed values (0 with one observation).
    double variance() const { return stats_.variance(); }
    double stddev() const { return stats_.stddev(); }
    std::uint64_t count() const { return stats_.count(); }

private:
    double psi_ = 1.0;
    stats::Welford stats_;
};

struct Colony {
    std::vector<Solution> members;
    /// Index of the member holding the best-so-far solution.
    std::size_t best_index = 0;
    Solution best;
    std::uint64_t generation = 0;
    DiversityTracker diversity;

    /// Points best/best_index at the fittest member if it is no worse than best.
    void refresh_best();
};

/// Per-generation bookkeeping, handed to EngineHooks::on_generation.
struct GenerationReport {
    std::uint64_t generation = 0;
    std::uint64_t employed_evaluations = 0;
    std::uint64_t onlooker_evaluations = 0;
    std::uint64_t onlooker_placements = 0;
    std::uint64_t local_evaluations = 0;
    std::uint64_t scout_evaluations = 0;
    std::uint64_t scouted = 0;
    bool local_search_ran = false;
    LocalSearchKind local_search_kind = LocalSearchKind::RandomWalk;
    double psi = 1.0;
    double psi_mean = 0.0;
    double psi_variance = 0.0;
    double best_fitness = 0.0;
};

/// Observation points for tests; all optional.
struct EngineHooks {
    /// Target index and the partner indices drawn for it.
    std::function<void(std::size_t, std::span<const std::size_t>)> on_partners;
    /// Target, donor and the (clamped) trial produced by crossover.
    std::function<void(std::span<const double>, std::span<const double>, std::span<const double>)> on_crossover;
    std::function<void(const GenerationReport&)> on_generation;
    /// Overrides the balancing probability p(psi) before the switch draw.
    std::function<double(double)> override_balance;
};

/// Samples NP members uniformly in the box and evaluates them.
Colony init_colony(const Problem& problem, const MabcConfig& config, BudgetLedger& ledger, RandomSource& rng);

/// `count` indices drawn uniformly from [0, np), mutually distinct and distinct from `exclude`.
std::vector<std::size_t> draw_partners(std::size_t np, std::size_t exclude, std::size_t count, RandomSource& rng);

/// v = x_r1 + (x_r2 - x_r3); no scale factor.
std::vector<double> mutate_rand1(const Colony& colony, std::size_t i, RandomSource& rng,
                                 const EngineHooks* hooks = nullptr);

/// v = x_i + (x_best - x_i) + (x_r1 - x_r2).
std::vector<double> mutate_current_to_best(const Colony& colony, std::size_t i, RandomSource& rng,
                                           const EngineHooks* hooks = nullptr);

/// Binomial crossover with one forced coordinate, then clamped to `bounds`.
std::vector<double> crossover(std::span<const double> target, std::span<const double> donor, double cr,
                              Bounds bounds, RandomSource& rng);

/// Keeps the trial when f(trial) <= f(incumbent) (counter reset), otherwise
/// returns the incumbent with its counter incremented. Throws BudgetExhausted.
Solution select_greedy(const Solution& incumbent, std::vector<double> trial, const Problem& problem,
                       BudgetLedger& ledger);

void employed_phase(Colony& colony, const Problem& problem, const MabcConfig& config, BudgetLedger& ledger,
                    RandomSource& rng, const EngineHooks* hooks = nullptr);

/// q_i = (f_i - f_worst) / (f_best - f_worst) over the current members; 1 for a flat colony.
double onlooker_probability(const Colony& colony, std::size_t i);

/// Places exactly NP onlookers unless a full scan over all sources places
/// none (only possible for a flat colony under LiteralEq6). Returns placements.
std::uint64_t onlooker_phase(Colony& colony, const Problem& problem, const MabcConfig& config,
                             BudgetLedger& ledger, RandomSource& rng, const EngineHooks* hooks = nullptr);

/// psi = 1 - |(f_avg - f_best) / (f_worst - f_best)|, clipped to [0,1]; 1 for a flat colony.
double fitness_diversity(const Colony& colony);

/// exp(-(psi - mu) / (2 sigma^2)) saturated to [0,1]; 1 when sigma is 0.
double balance_probability(const DiversityTracker& tracker);

/// Nelder-Mead when `draw` > p under SwitchRule::Equation, when `draw` < p under Prose.
LocalSearchKind choose_local_search(double p, double draw, SwitchRule rule);

struct LocalImproveResult {
    bool ran = false;
    LocalSearchKind kind = LocalSearchKind::RandomWalk;
    std::uint64_t evaluations = 0;
    bool improved = false;
};

/// Pushes this generation's psi into the tracker, then with probability
/// local_search_ratio improves a copy of the best member.
LocalImproveResult local_improve_best(Colony& colony, const Problem& problem, const MabcConfig& config,
                                      BudgetLedger& ledger, RandomSource& rng, const EngineHooks* hooks = nullptr);

/// Re-seeds every non-best member whose counter reached scout_limit. Returns the count.
std::uint64_t scout_phase(Colony& colony, const Problem& problem, const MabcConfig& config, BudgetLedger& ledger,
                          RandomSource& rng);

struct RunOptions {
    std::string problem_id = "problem";
    /// Evaluation counts for the exact best-error snapshots.
    std::vector<std::uint64_t> checkpoints;
    /// Trace spacing in evaluations (0: checkpoints and the end of init only).
    std::uint64_t trace_stride = 1000;
};

/// Runs the four phases until the budget is spent.
stats::RunRecord run(const Problem& problem, const MabcConfig& config, std::uint64_t seed,
                     const RunOptions& options = {}, const EngineHooks* hooks = nullptr);

}  // namespace mabc
