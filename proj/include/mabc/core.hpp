#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mabc {

/// Box constraint applied uniformly to every coordinate.
struct Bounds {
    double lower = 0.0;
    double upper = 1.0;

    /// Throws std::invalid_argument unless lower < upper and both are finite.
    static Bounds make(double lower, double upper);

    double width() const { return upper - lower; }
    bool contains(double v) const { return v >= lower && v <= upper; }
};

/// A food source: position, objective value and the no-improvement counter.
struct Solution {
    std::vector<double> position;
    double fitness = std::numeric_limits<double>::infinity();
    std::uint32_t trial_counter = 0;
};

/// Objective to minimise over a box.
class Problem {
public:
    virtual ~Problem() = default;

    virtual std::size_t dimension() const = 0;
    virtual Bounds bounds() const = 0;
    virtual double value(std::span<const double> x) const = 0;

    /// Objective value at the global optimum; errors are reported relative to it.
    virtual double optimum_value() const { return 0.0; }
};

/// Adapter for ad-hoc objectives (tests, examples).
class FunctionProblem final : public Problem {
public:
    using Fn = std::function<double(std::span<const double>)>;

    FunctionProblem(std::size_t dimension, Bounds bounds, Fn fn, double optimum = 0.0)
        : dimension_(dimension), bounds_(bounds), fn_(std::move(fn)), optimum_(optimum) {}

    std::size_t dimension() const override { return dimension_; }
    Bounds bounds() const override { return bounds_; }
    double value(std::span<const double> x) const override { return fn_(x); }
    double optimum_value() const override { return optimum_; }

private:
    std::size_t dimension_;
    Bounds bounds_;
    Fn fn_;
    double optimum_;
};

// ---------------------------------------------------------------------------
// Randomness
// ---------------------------------------------------------------------------

/// Source of raw 64-bit words. Every derived draw (uniform, index, normal) is
/// computed here from those words so the sequence only depends on the engine.
class RandomSource {
public:
    virtual ~RandomSource() = default;

    virtual std::uint64_t next_u64() = 0;

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). n must be positive.
    std::size_t index(std::size_t n) {
        auto k = static_cast<std::size_t>(uniform() * static_cast<double>(n));
        return k < n ? k : n - 1;
    }

    /// Standard normal via Box-Muller (two uniforms per draw, no cached spare).
    double normal();
};

/// Seedable per-run stream (64-bit Mersenne Twister).
class RngStream final : public RandomSource {
public:
    explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t next_u64() override { return engine_(); }
    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------
// Budget accounting
// ---------------------------------------------------------------------------

/// Thrown by evaluate() when the run has no evaluations left.
class BudgetExhausted : public std::runtime_error {
public:
    BudgetExhausted() : std::runtime_error("function-evaluation budget exhausted") {}
};

struct TracePoint {
    std::uint64_t evaluations = 0;
    double best_error = 0.0;

    friend bool operator==(const TracePoint&, const TracePoint&) = default;
};

/// Counts objective evaluations and snapshots the best error seen so far
/// whenever the count hits a checkpoint or a trace mark.
class BudgetLedger {
public:
    /// `checkpoints` must be strictly increasing and <= max_evaluations.
    /// `trace_marks` may be in any order; duplicates are merged.
    explicit BudgetLedger(std::uint64_t max_evaluations,
                          std::vector<std::uint64_t> checkpoints = {},
                          std::vector<std::uint64_t> trace_marks = {});

    std::uint64_t used() const { return used_; }
    std::uint64_t max_evaluations() const { return max_; }
    std::uint64_t remaining() const { return max_ - used_; }
    bool exhausted() const { return used_ >= max_; }

    /// Best error (objective minus optimum) seen over all evaluations.
    double best_error() const { return best_error_; }

    const std::vector<std::uint64_t>& checkpoints() const { return checkpoints_; }
    const std::vector<TracePoint>& checkpoint_errors() const { return checkpoint_errors_; }
    const std::vector<TracePoint>& trace() const { return trace_; }

    /// Books one evaluation whose objective error is `error`.
    /// Throws BudgetExhausted if nothing is left.
    void charge(double error);

private:
    std::uint64_t max_;
    std::uint64_t used_ = 0;
    double best_error_ = std::numeric_limits<double>::infinity();

    std::vector<std::uint64_t> checkpoints_;
    std::vector<std::uint64_t> marks_;
    std::size_t next_checkpoint_ = 0;
    std::size_t next_mark_ = 0;
    std::vector<TracePoint> checkpoint_errors_;
    std::vector<TracePoint> trace_;
};

/// Saturates every component into [lower, upper].
std::vector<double> clamp_to_bounds(std::span<const double> position, Bounds bounds);
void clamp_in_place(std::span<double> position, Bounds bounds);

/// Evaluates `position`, charging one evaluation to `ledger`.
/// Throws BudgetExhausted (without evaluating) when the ledger is spent.
double evaluate(const Problem& problem, std::span<const double> position, BudgetLedger& ledger);

}  // namespace mabc
