#include "mabc/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mabc {

Bounds Bounds::make(double lower, double upper) {
    if (!std::isfinite(lower) || !std::isfinite(upper))
        throw std::invalid_argument("bounds must be finite");
    if (!(lower < upper))
        throw std::invalid_argument("lower bound must be below upper bound");
    return Bounds{lower, upper};
}

double RandomSource::normal() {
    double u1 = uniform();
    double u2 = uniform();
    // 1 - u1 lies in (0, 1], so the log is finite.
    return std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

BudgetLedger::BudgetLedger(std::uint64_t max_evaluations, std::vector<std::uint64_t> checkpoints,
                           std::vector<std::uint64_t> trace_marks)
    : max_(max_evaluations), checkpoints_(std::move(checkpoints)), marks_(std::move(trace_marks)) {
    if (max_ == 0) throw std::invalid_argument("max_evaluations must be positive");
    for (std::size_t k = 0; k < checkpoints_.size(); ++k) {
        if (checkpoints_[k] == 0 || checkpoints_[k] > max_)
            throw std::invalid_argument("checkpoint outside (0, max_evaluations]");
        if (k > 0 && checkpoints_[k] <= checkpoints_[k - 1])
            throw std::invalid_argument("checkpoints must be strictly increasing");
    }
    // Checkpoints always appear in the trace as well.
    marks_.insert(marks_.end(), checkpoints_.begin(), checkpoints_.end());
    std::erase_if(marks_, [this](std::uint64_t m) { return m == 0 || m > max_; });
    std::sort(marks_.begin(), marks_.end());
    marks_.erase(std::unique(marks_.begin(), marks_.end()), marks_.end());
    checkpoint_errors_.reserve(checkpoints_.size());
    trace_.reserve(marks_.size());
}

void BudgetLedger::charge(double error) {
    if (exhausted()) throw BudgetExhausted{};
    ++used_;
    if (error < best_error_) best_error_ = error;
    if (next_checkpoint_ < checkpoints_.size() && checkpoints_[next_checkpoint_] == used_) {
        checkpoint_errors_.push_back({used_, best_error_});
        ++next_checkpoint_;
    }
    if (next_mark_ < marks_.size() && marks_[next_mark_] == used_) {
        trace_.push_back({used_, best_error_});
        ++next_mark_;
    }
}

std::vector<double> clamp_to_bounds(std::span<const double> position, Bounds bounds) {
    std::vector<double> out(position.begin(), position.end());
    clamp_in_place(out, bounds);
    return out;
}

void clamp_in_place(std::span<double> position, Bounds bounds) {
    for (double& c : position) c = std::clamp(c, bounds.lower, bounds.upper);
}

double evaluate(const Problem& problem, std::span<const double> position, BudgetLedger& ledger) {
    if (ledger.exhausted()) throw BudgetExhausted{};
    if (position.size() != problem.dimension())
        throw std::invalid_argument("position length does not match problem dimension");
    double f = problem.value(position);
    ledger.charge(f - problem.optimum_value());
    return f;
}

}  // namespace mabc
