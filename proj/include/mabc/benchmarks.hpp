#pragma once

// The 20 large-scale test problems (CEC'2010 LSGO suite layout). Constants
// and their origin are listed in SUITE.md at the repository root.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mabc/core.hpp"

namespace mabc::bench {

enum class BaseFunction { Elliptic, Rastrigin, Ackley, Schwefel12, Rosenbrock, Sphere };

enum class SeparabilityClass {
    Separable,          // F1-F3
    SingleGroup,        // F4-F8: one m-group, weighted by 1e6
    HalfGroups,         // F9-F13: D/2m groups + separable remainder
    AllGroups,          // F14-F18: D/m groups
    FullyNonseparable,  // F19-F20
};

std::string_view to_string(BaseFunction f);
std::string_view to_string(SeparabilityClass c);

double eval_elliptic(std::span<const double> z);
double eval_rastrigin(std::span<const double> z);
double eval_ackley(std::span<const double> z);
/// Prefix-sum form, O(n).
double eval_schwefel12(std::span<const double> z);
/// Optimum at the all-ones vector.
double eval_rosenbrock(std::span<const double> z);
double eval_sphere(std::span<const double> z);
double eval_base(BaseFunction f, std::span<const double> z);

/// Identifier F1..F20.
class ProblemId {
public:
    static constexpr int kCount = 20;

    /// Throws std::invalid_argument outside 1..20.
    static ProblemId from_number(int n);
    /// Accepts "F7", "f7" or "7".
    static ProblemId parse(std::string_view text);
    static std::vector<ProblemId> all();

    int number() const { return number_; }
    std::string name() const { return "F" + std::to_string(number_); }

    friend bool operator==(ProblemId, ProblemId) = default;
    friend auto operator<=>(ProblemId, ProblemId) = default;

private:
    explicit ProblemId(int n) : number_(n) {}
    int number_;
};

/// Static description of one suite member.
struct ProblemInfo {
    ProblemId id;
    SeparabilityClass separability;
    BaseFunction base;
    /// Base function of the separable remainder (classes 2 and 3).
    BaseFunction remainder;
    /// Grouped variables go through a random rotation.
    bool rotated;
};

ProblemInfo problem_info(ProblemId id);
Bounds problem_bounds(ProblemId id);

/// Dense square matrix, row-major.
struct SquareMatrix {
    std::size_t n = 0;
    std::vector<double> data;

    double operator()(std::size_t r, std::size_t c) const { return data[r * n + c]; }
    /// out = M * in; `in` and `out` must not alias.
    void apply(std::span<const double> in, std::span<double> out) const;
    /// max |M^T M - I| over all entries.
    double orthogonality_error() const;
    double determinant() const;
};

/// Random orthogonal matrix: Gaussian entries, then modified Gram-Schmidt
/// (applied twice) on the columns.
SquareMatrix generate_rotation(std::size_t m, RandomSource& rng);

/// How the D variables split into groups for a given id.
struct GroupStructure {
    std::size_t dimension = 0;
    std::size_t group_size = 0;
    /// Zero-based bijection on {0..D-1}; identity for classes 1 and 5.
    std::vector<std::size_t> permutation;
    /// Number of m-sized non-separable groups (0 for classes 1 and 5).
    std::size_t group_count = 0;
    SeparabilityClass separability = SeparabilityClass::Separable;
};

/// Throws std::invalid_argument on bad divisibility (2m | D for class 3,
/// m | D for class 4, m <= D for class 2) or D < 2.
GroupStructure group_structure(ProblemId id, std::size_t dimension, std::size_t group_size,
                               std::vector<std::size_t> permutation);

struct ProblemData {
    std::vector<double> shift;
    std::vector<std::size_t> permutation;
    /// One matrix per rotated group; empty for non-rotated problems.
    std::vector<SquareMatrix> rotations;
    /// Multiplier of the single non-separable group (class 2 only).
    double weight = 1.0e6;
};

/// Deterministic in (id, D, m, data_seed).
ProblemData generate_problem_data(ProblemId id, std::size_t dimension, std::size_t group_size,
                                  std::uint64_t data_seed);

/// Overrides generated data with any of these files found in `dir`:
///   F<n>-shift.txt  at least D reals (first D are used)
///   F<n>-perm.txt   D integers, zero- or one-based
///   F<n>-rot.txt    m*m reals (shared by all groups) or groups*m*m reals
/// Tokens are whitespace-separated decimals; matrices are row-major.
ProblemData load_problem_data(ProblemId id, std::size_t dimension, std::size_t group_size,
                              const std::filesystem::path& dir, std::uint64_t fallback_seed);

/// Reads every whitespace-separated real in a text file.
std::vector<double> read_reals(const std::filesystem::path& path);

class BenchmarkProblem final : public Problem {
public:
    BenchmarkProblem(ProblemId id, std::size_t dimension, std::size_t group_size, ProblemData data);

    std::size_t dimension() const override { return groups_.dimension; }
    Bounds bounds() const override { return bounds_; }
    double value(std::span<const double> x) const override;

    ProblemId id() const { return info_.id; }
    const ProblemInfo& info() const { return info_; }
    const GroupStructure& groups() const { return groups_; }
    const ProblemData& data() const { return data_; }

    /// Analytic minimiser: the shift, plus one on every Rosenbrock coordinate.
    std::vector<double> optimum() const;

private:
    double grouped_value(std::span<const double> z, std::size_t first, std::size_t group,
                         std::span<double> scratch_in, std::span<double> scratch_out) const;

    ProblemInfo info_;
    Bounds bounds_;
    GroupStructure groups_;
    ProblemData data_;
};

/// Builds F<id> at dimension D with group size m from generated data.
BenchmarkProblem compose_problem(ProblemId id, std::size_t dimension, std::size_t group_size,
                                 std::uint64_t data_seed);

}  // namespace mabc::bench
