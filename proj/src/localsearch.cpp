#include "mabc/localsearch.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mabc::ls {

namespace {

struct GrantSpent {};

/// Evaluation counter for one invocation: stops at the grant or when the
/// run's ledger runs dry, and remembers the best point it has seen.
class Probe {
public:
    Probe(const Problem& problem, BudgetLedger& ledger, std::uint64_t grant, const Solution& start)
        : problem_(problem), ledger_(ledger), grant_(grant),
          best_(start.position), best_f_(start.fitness) {}

    double operator()(std::span<const double> x) {
        if (used_ >= grant_) throw GrantSpent{};
        const double f = evaluate(problem_, x, ledger_);
        ++used_;
        if (f < best_f_) {
            best_f_ = f;
            best_.assign(x.begin(), x.end());
        }
        return f;
    }

    bool spent() const { return used_ >= grant_; }

    LsOutcome outcome() && { return {std::move(best_), best_f_, used_}; }

private:
    const Problem& problem_;
    BudgetLedger& ledger_;
    std::uint64_t grant_;
    std::uint64_t used_ = 0;
    std::vector<double> best_;
    double best_f_;
};

}  // namespace

LsOutcome nma_search(const Solution& start, const Problem& problem, std::uint64_t budget,
                     std::size_t subspace_size, RandomSource& rng, BudgetLedger& ledger,
                     const NmaParams& params) {
    const std::size_t dim = problem.dimension();
    const std::size_t n = subspace_size;
    if (n < 2 || n > dim) throw std::invalid_argument("NMA subspace size must lie in [2, D]");
    if (budget < n + 1) throw std::invalid_argument("NMA budget too small to build the simplex");

    const Bounds bounds = problem.bounds();
    Probe probe(problem, ledger, budget, start);

    // Partial Fisher-Yates picks the active coordinates.
    std::vector<std::size_t> order(dim);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t k = 0; k < n; ++k) std::swap(order[k], order[k + rng.index(dim - k)]);
    const std::vector<std::size_t> coords(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n));

    std::vector<double> full = start.position;
    auto eval_sub = [&](std::span<const double> sub) {
        for (std::size_t k = 0; k < n; ++k) full[coords[k]] = sub[k];
        return probe(full);
    };
    auto clamp = [&](std::vector<double>& p) { clamp_in_place(p, bounds); };

    using Point = std::vector<double>;
    std::vector<Point> simplex(n + 1, Point(n));
    std::vector<double> f(n + 1);
    for (std::size_t k = 0; k < n; ++k) simplex[0][k] = start.position[coords[k]];
    f[0] = start.fitness;

    try {
        const double step = params.step_fraction * bounds.width();
        for (std::size_t v = 1; v <= n; ++v) {
            simplex[v] = simplex[0];
            double& c = simplex[v][v - 1];
            // Step inward when the start sits near the upper face.
            c = c + step <= bounds.upper ? c + step : c - step;
            clamp(simplex[v]);
            f[v] = eval_sub(simplex[v]);
        }

        std::vector<std::size_t> idx(n + 1);
        Point centroid(n), reflected(n), trial(n);
        while (!probe.spent()) {
            std::iota(idx.begin(), idx.end(), std::size_t{0});
            std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
            const std::size_t best = idx.front();
            const std::size_t worst = idx.back();
            const std::size_t second_worst = idx[n - 1];
            if (f[worst] - f[best] < params.spread_tolerance) break;

            std::fill(centroid.begin(), centroid.end(), 0.0);
            for (std::size_t v = 0; v <= n; ++v) {
                if (v == worst) continue;
                for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[v][k];
            }
            for (double& c : centroid) c /= static_cast<double>(n);

            for (std::size_t k = 0; k < n; ++k)
                reflected[k] = centroid[k] + params.reflection * (centroid[k] - simplex[worst][k]);
            clamp(reflected);
            const double fr = eval_sub(reflected);

            if (fr < f[best]) {
                for (std::size_t k = 0; k < n; ++k)
                    trial[k] = centroid[k] + params.expansion * (reflected[k] - centroid[k]);
                clamp(trial);
                const double fe = eval_sub(trial);
                if (fe < fr) {
                    simplex[worst] = trial;
                    f[worst] = fe;
                } else {
                    simplex[worst] = reflected;
                    f[worst] = fr;
                }
                continue;
            }
            if (fr < f[second_worst]) {
                simplex[worst] = reflected;
                f[worst] = fr;
                continue;
            }

            bool contracted = false;
            if (fr < f[worst]) {
                for (std::size_t k = 0; k < n; ++k)
                    trial[k] = centroid[k] + params.contraction * (reflected[k] - centroid[k]);
                clamp(trial);
                const double fc = eval_sub(trial);
                if (fc <= fr) {
                    simplex[worst] = trial;
                    f[worst] = fc;
                    contracted = true;
                }
            } else {
                for (std::size_t k = 0; k < n; ++k)
                    trial[k] = centroid[k] + params.contraction * (simplex[worst][k] - centroid[k]);
                clamp(trial);
                const double fcc = eval_sub(trial);
                if (fcc < f[worst]) {
                    simplex[worst] = trial;
                    f[worst] = fcc;
                    contracted = true;
                }
            }
            if (contracted) continue;

            for (std::size_t v = 0; v <= n; ++v) {
                if (v == best) continue;
                for (std::size_t k = 0; k < n; ++k)
                    simplex[v][k] = simplex[best][k] + params.shrink * (simplex[v][k] - simplex[best][k]);
                clamp(simplex[v]);
                f[v] = eval_sub(simplex[v]);
            }
        }
    } catch (const GrantSpent&) {
    } catch (const BudgetExhausted&) {
    }
    return std::move(probe).outcome();
}

LsOutcome rwde_search(const Solution& start, const Problem& problem, std::uint64_t budget,
                      RandomSource& rng, BudgetLedger& ledger, const RwdeParams& params,
                      const StepObserver& on_step) {
    if (budget == 0) throw std::invalid_argument("RWDE budget must be positive");
    const std::size_t dim = problem.dimension();
    const Bounds bounds = problem.bounds();
    Probe probe(problem, ledger, budget, start);

    std::vector<double> x = start.position;
    double fx = start.fitness;
    double step = params.initial_step_fraction * bounds.width();
    const double min_step = params.min_step_fraction * bounds.width();
    int fails = 0;

    std::vector<double> dir(dim), cand(dim);
    auto try_step = [&]() {
        if (on_step) on_step(step);
        for (std::size_t j = 0; j < dim; ++j) cand[j] = x[j] + step * dir[j];
        clamp_in_place(cand, bounds);
        const double fc = probe(cand);
        if (fc < fx) {
            x = cand;
            fx = fc;
            return true;
        }
        return false;
    };

    try {
        while (!probe.spent() && step >= min_step) {
            double norm = 0.0;
            do {
                norm = 0.0;
                for (double& d : dir) {
                    d = rng.normal();
                    norm += d * d;
                }
            } while (norm == 0.0);
            norm = std::sqrt(norm);
            for (double& d : dir) d /= norm;

            if (try_step()) {
                fails = 0;
                // Exploit the successful direction once more.
                if (!probe.spent()) try_step();
            } else if (++fails >= params.max_fail) {
                step *= 0.5;
                fails = 0;
            }
        }
    } catch (const GrantSpent&) {
    } catch (const BudgetExhausted&) {
    }
    return std::move(probe).outcome();
}

}  // namespace mabc::ls
