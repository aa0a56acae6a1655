#pragma once

#include <cstdint>
#include <vector>

#include "mabc/core.hpp"

namespace mabc::ls {

struct LsOutcome {
    std::vector<double> improved_position;
    double improved_fitness = 0.0;
    std::uint64_t evaluations_used = 0;
};

/// Nelder-Mead on a random coordinate subspace. Coefficients are the
/// textbook ones; the initial step is a fraction of the box width.
struct NmaParams {
    double step_fraction = 0.05;
    double reflection = 1.0;
    double expansion = 2.0;
    double contraction = 0.5;
    double shrink = 0.5;
    double spread_tolerance = 1e-12;
};

/// Random walk with direction exploitation.
struct RwdeParams {
    double initial_step_fraction = 0.1;
    /// Consecutive failed directions before the step is halved.
    int max_fail = 5;
    /// The walk stops once the step drops below this fraction of the width.
    double min_step_fraction = 1e-8;
};

/// Observes every step length the walk tries (tests only).
using StepObserver = std::function<void(double)>;

/// Improves `start` using at most `budget` evaluations on `subspace_size`
/// randomly chosen coordinates; all other coordinates stay bit-identical.
/// Throws std::invalid_argument unless 2 <= subspace_size <= D and
/// budget >= subspace_size + 1. Ledger exhaustion ends the search early.
LsOutcome nma_search(const Solution& start, const Problem& problem, std::uint64_t budget,
                     std::size_t subspace_size, RandomSource& rng, BudgetLedger& ledger,
                     const NmaParams& params = {});

/// Throws std::invalid_argument when budget is zero.
LsOutcome rwde_search(const Solution& start, const Problem& problem, std::uint64_t budget,
                      RandomSource& rng, BudgetLedger& ledger, const RwdeParams& params = {},
                      const StepObserver& on_step = {});

}  // namespace mabc::ls
