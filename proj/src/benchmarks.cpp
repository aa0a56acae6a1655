#include "mabc/benchmarks.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace mabc::bench {

std::string_view to_string(BaseFunction f) {
    switch (f) {
        case BaseFunction::Elliptic: return "elliptic";
        case BaseFunction::Rastrigin: return "rastrigin";
        case BaseFunction::Ackley: return "ackley";
        case BaseFunction::Schwefel12: return "schwefel1.2";
        case BaseFunction::Rosenbrock: return "rosenbrock";
        case BaseFunction::Sphere: return "sphere";
    }
    return "?";
}

std::string_view to_string(SeparabilityClass c) {
    switch (c) {
        case SeparabilityClass::Separable: return "separable";
        case SeparabilityClass::SingleGroup: return "single-group";
        case SeparabilityClass::HalfGroups: return "D/2m-group";
        case SeparabilityClass::AllGroups: return "D/m-group";
        case SeparabilityClass::FullyNonseparable: return "fully-nonseparable";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Base functions
// ---------------------------------------------------------------------------

double eval_elliptic(std::span<const double> z) {
    const std::size_t n = z.size();
    if (n == 0) return 0.0;
    if (n == 1) return z[0] * z[0];
    // Weights depend only on n; a problem evaluates at most two lengths.
    thread_local std::vector<double> weights[2];
    thread_local std::size_t slot = 0;
    std::vector<double>* w = nullptr;
    for (auto& cand : weights)
        if (cand.size() == n) w = &cand;
    if (w == nullptr) {
        w = &weights[slot];
        slot ^= 1;
        w->resize(n);
        const double denom = static_cast<double>(n - 1);
        for (std::size_t i = 0; i < n; ++i) (*w)[i] = std::pow(1.0e6, static_cast<double>(i) / denom);
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += (*w)[i] * z[i] * z[i];
    return sum;
}

double eval_rastrigin(std::span<const double> z) {
    double sum = 0.0;
    for (double v : z) sum += v * v - 10.0 * std::cos(2.0 * std::numbers::pi * v) + 10.0;
    return sum;
}

double eval_ackley(std::span<const double> z) {
    if (z.empty()) return 0.0;
    const double n = static_cast<double>(z.size());
    double sq = 0.0, cs = 0.0;
    for (double v : z) {
        sq += v * v;
        cs += std::cos(2.0 * std::numbers::pi * v);
    }
    return -20.0 * std::exp(-0.2 * std::sqrt(sq / n)) - std::exp(cs / n) + 20.0 + std::numbers::e;
}

double eval_schwefel12(std::span<const double> z) {
    double prefix = 0.0, sum = 0.0;
    for (double v : z) {
        prefix += v;
        sum += prefix * prefix;
    }
    return sum;
}

double eval_rosenbrock(std::span<const double> z) {
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < z.size(); ++i) {
        const double a = z[i] * z[i] - z[i + 1];
        const double b = z[i] - 1.0;
        sum += 100.0 * a * a + b * b;
    }
    return sum;
}

double eval_sphere(std::span<const double> z) {
    double sum = 0.0;
    for (double v : z) sum += v * v;
    return sum;
}

double eval_base(BaseFunction f, std::span<const double> z) {
    switch (f) {
        case BaseFunction::Elliptic: return eval_elliptic(z);
        case BaseFunction::Rastrigin: return eval_rastrigin(z);
        case BaseFunction::Ackley: return eval_ackley(z);
        case BaseFunction::Schwefel12: return eval_schwefel12(z);
        case BaseFunction::Rosenbrock: return eval_rosenbrock(z);
        case BaseFunction::Sphere: return eval_sphere(z);
    }
    throw std::logic_error("unknown base function");
}

// ---------------------------------------------------------------------------
// Identifiers and static metadata
// ---------------------------------------------------------------------------

ProblemId ProblemId::from_number(int n) {
    if (n < 1 || n > kCount) throw std::invalid_argument("unknown problem id F" + std::to_string(n));
    return ProblemId(n);
}

ProblemId ProblemId::parse(std::string_view text) {
    std::string_view digits = text;
    if (!digits.empty() && (digits.front() == 'F' || digits.front() == 'f')) digits.remove_prefix(1);
    if (digits.empty() || digits.size() > 2 ||
        !std::all_of(digits.begin(), digits.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
        throw std::invalid_argument("unknown problem id '" + std::string(text) + "'");
    return from_number(std::stoi(std::string(digits)));
}

std::vector<ProblemId> ProblemId::all() {
    std::vector<ProblemId> ids;
    for (int n = 1; n <= kCount; ++n) ids.push_back(ProblemId(n));
    return ids;
}

ProblemInfo problem_info(ProblemId id) {
    using B = BaseFunction;
    using S = SeparabilityClass;
    // Within classes 2-4 the five members cycle through the same bases.
    static constexpr B kCycle[5] = {B::Elliptic, B::Rastrigin, B::Ackley, B::Schwefel12, B::Rosenbrock};
    const int n = id.number();
    if (n <= 3) return {id, S::Separable, kCycle[n - 1], kCycle[n - 1], false};
    if (n >= 19) {
        B base = n == 19 ? B::Schwefel12 : B::Rosenbrock;
        return {id, S::FullyNonseparable, base, base, false};
    }
    const int cls = (n - 4) / 5;
    const B base = kCycle[(n - 4) % 5];
    const bool rotated = base == B::Elliptic || base == B::Rastrigin || base == B::Ackley;
    // Schwefel/Rosenbrock groups leave a sphere remainder.
    const B remainder = rotated ? base : B::Sphere;
    const S sep = cls == 0 ? S::SingleGroup : cls == 1 ? S::HalfGroups : S::AllGroups;
    return {id, sep, base, remainder, rotated};
}

Bounds problem_bounds(ProblemId id) {
    switch (problem_info(id).base) {
        case BaseFunction::Rastrigin: return Bounds{-5.0, 5.0};
        case BaseFunction::Ackley: return Bounds{-32.0, 32.0};
        default: return Bounds{-100.0, 100.0};
    }
}

// ---------------------------------------------------------------------------
// Matrices
// ---------------------------------------------------------------------------

void SquareMatrix::apply(std::span<const double> in, std::span<double> out) const {
    for (std::size_t r = 0; r < n; ++r) {
        const double* row = data.data() + r * n;
        double acc = 0.0;
        for (std::size_t c = 0; c < n; ++c) acc += row[c] * in[c];
        out[r] = acc;
    }
}

double SquareMatrix::orthogonality_error() const {
    double worst = 0.0;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            double dot = 0.0;
            for (std::size_t r = 0; r < n; ++r) dot += (*this)(r, a) * (*this)(r, b);
            worst = std::max(worst, std::abs(dot - (a == b ? 1.0 : 0.0)));
        }
    return worst;
}

double SquareMatrix::determinant() const {
    std::vector<double> lu = data;
    double det = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t pivot = k;
        for (std::size_t r = k + 1; r < n; ++r)
            if (std::abs(lu[r * n + k]) > std::abs(lu[pivot * n + k])) pivot = r;
        if (lu[pivot * n + k] == 0.0) return 0.0;
        if (pivot != k) {
            for (std::size_t c = 0; c < n; ++c) std::swap(lu[k * n + c], lu[pivot * n + c]);
            det = -det;
        }
        det *= lu[k * n + k];
        for (std::size_t r = k + 1; r < n; ++r) {
            const double factor = lu[r * n + k] / lu[k * n + k];
            for (std::size_t c = k; c < n; ++c) lu[r * n + c] -= factor * lu[k * n + c];
        }
    }
    return det;
}

SquareMatrix generate_rotation(std::size_t m, RandomSource& rng) {
    if (m == 0) throw std::invalid_argument("rotation size must be positive");
    // Columns are generated and orthonormalised in column-major scratch.
    std::vector<double> cols(m * m);
    for (double& v : cols) v = rng.normal();
    for (std::size_t j = 0; j < m; ++j) {
        double* cj = cols.data() + j * m;
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t k = 0; k < j; ++k) {
                const double* ck = cols.data() + k * m;
                double dot = 0.0;
                for (std::size_t r = 0; r < m; ++r) dot += ck[r] * cj[r];
                for (std::size_t r = 0; r < m; ++r) cj[r] -= dot * ck[r];
            }
        }
        double norm = 0.0;
        for (std::size_t r = 0; r < m; ++r) norm += cj[r] * cj[r];
        norm = std::sqrt(norm);
        for (std::size_t r = 0; r < m; ++r) cj[r] /= norm;
    }
    SquareMatrix out{m, std::vector<double>(m * m)};
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < m; ++c) out.data[r * m + c] = cols[c * m + r];
    return out;
}

// ---------------------------------------------------------------------------
// Group structure and data
// ---------------------------------------------------------------------------

GroupStructure group_structure(ProblemId id, std::size_t dimension, std::size_t group_size,
                               std::vector<std::size_t> permutation) {
    if (dimension < 2) throw std::invalid_argument("dimension must be at least 2");
    if (group_size == 0) throw std::invalid_argument("group size must be positive");
    const auto sep = problem_info(id).separability;
    GroupStructure g{dimension, group_size, {}, 0, sep};
    switch (sep) {
        case SeparabilityClass::Separable:
        case SeparabilityClass::FullyNonseparable:
            permutation.resize(dimension);
            std::iota(permutation.begin(), permutation.end(), std::size_t{0});
            break;
        case SeparabilityClass::SingleGroup:
            if (group_size > dimension)
                throw std::invalid_argument(id.name() + ": group size exceeds dimension");
            g.group_count = 1;
            break;
        case SeparabilityClass::HalfGroups:
            if (dimension % (2 * group_size) != 0)
                throw std::invalid_argument(id.name() + ": requires 2m to divide D");
            g.group_count = dimension / (2 * group_size);
            break;
        case SeparabilityClass::AllGroups:
            if (dimension % group_size != 0)
                throw std::invalid_argument(id.name() + ": requires m to divide D");
            g.group_count = dimension / group_size;
            break;
    }
    if (permutation.size() != dimension) throw std::invalid_argument("permutation length differs from D");
    std::vector<char> seen(dimension, 0);
    for (std::size_t p : permutation) {
        if (p >= dimension || seen[p]) throw std::invalid_argument("permutation is not a bijection");
        seen[p] = 1;
    }
    g.permutation = std::move(permutation);
    return g;
}

namespace {

std::uint64_t mix_seed(std::uint64_t seed, int id) {
    // splitmix64 finaliser over (seed, id)
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(id);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::size_t rotation_count(const ProblemInfo& info, std::size_t dimension, std::size_t group_size) {
    if (!info.rotated) return 0;
    switch (info.separability) {
        case SeparabilityClass::SingleGroup: return 1;
        case SeparabilityClass::HalfGroups: return dimension / (2 * group_size);
        case SeparabilityClass::AllGroups: return dimension / group_size;
        default: return 0;
    }
}

}  // namespace

ProblemData generate_problem_data(ProblemId id, std::size_t dimension, std::size_t group_size,
                                  std::uint64_t data_seed) {
    const ProblemInfo info = problem_info(id);
    // Validates divisibility before any allocation.
    std::vector<std::size_t> identity(dimension);
    std::iota(identity.begin(), identity.end(), std::size_t{0});
    (void)group_structure(id, dimension, group_size, identity);

    RngStream rng(mix_seed(data_seed, id.number()));
    const Bounds b = problem_bounds(id);
    ProblemData data;

    // Shift: centre +/- 40% of the width keeps o (and o+1 for Rosenbrock) strictly inside.
    const double centre = 0.5 * (b.lower + b.upper);
    const double half = 0.4 * b.width();
    data.shift.resize(dimension);
    for (double& o : data.shift) o = centre + (2.0 * rng.uniform() - 1.0) * half;

    // Fisher-Yates
    data.permutation = identity;
    for (std::size_t i = dimension - 1; i > 0; --i) std::swap(data.permutation[i], data.permutation[rng.index(i + 1)]);

    const std::size_t rotations = rotation_count(info, dimension, group_size);
    data.rotations.reserve(rotations);
    for (std::size_t k = 0; k < rotations; ++k) data.rotations.push_back(generate_rotation(group_size, rng));
    return data;
}

std::vector<double> read_reals(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<double> values;
    std::string token;
    while (in >> token) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(token, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != token.size()) throw std::runtime_error(path.string() + ": not a number: " + token);
        values.push_back(v);
    }
    return values;
}

ProblemData load_problem_data(ProblemId id, std::size_t dimension, std::size_t group_size,
                              const std::filesystem::path& dir, std::uint64_t fallback_seed) {
    ProblemData data = generate_problem_data(id, dimension, group_size, fallback_seed);
    const std::string stem = id.name();

    if (auto p = dir / (stem + "-shift.txt"); std::filesystem::exists(p)) {
        auto v = read_reals(p);
        if (v.size() < dimension) throw std::runtime_error(p.string() + ": fewer than D values");
        data.shift.assign(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(dimension));
    }
    if (auto p = dir / (stem + "-perm.txt"); std::filesystem::exists(p)) {
        auto v = read_reals(p);
        if (v.size() != dimension) throw std::runtime_error(p.string() + ": expected D entries");
        const double lowest = *std::min_element(v.begin(), v.end());
        if (lowest != 0.0 && lowest != 1.0) throw std::runtime_error(p.string() + ": indices must start at 0 or 1");
        data.permutation.clear();
        for (double x : v) {
            if (x != std::floor(x)) throw std::runtime_error(p.string() + ": non-integer index");
            data.permutation.push_back(static_cast<std::size_t>(x - lowest));
        }
    }
    if (auto p = dir / (stem + "-rot.txt"); std::filesystem::exists(p) && !data.rotations.empty()) {
        auto v = read_reals(p);
        const std::size_t block = group_size * group_size;
        const std::size_t groups = data.rotations.size();
        if (v.size() != block && v.size() != block * groups)
            throw std::runtime_error(p.string() + ": expected m*m or groups*m*m values");
        for (std::size_t k = 0; k < groups; ++k) {
            const std::size_t offset = v.size() == block ? 0 : k * block;
            data.rotations[k].n = group_size;
            data.rotations[k].data.assign(v.begin() + static_cast<std::ptrdiff_t>(offset),
                                          v.begin() + static_cast<std::ptrdiff_t>(offset + block));
            // Published text data carries limited digits.
            if (data.rotations[k].orthogonality_error() > 1e-6)
                throw std::runtime_error(p.string() + ": matrix is not orthogonal");
        }
    }
    return data;
}

// ---------------------------------------------------------------------------
// Composed problems
// ---------------------------------------------------------------------------

BenchmarkProblem::BenchmarkProblem(ProblemId id, std::size_t dimension, std::size_t group_size, ProblemData data)
    : info_(problem_info(id)),
      bounds_(problem_bounds(id)),
      groups_(group_structure(id, dimension, group_size, data.permutation)),
      data_(std::move(data)) {
    if (data_.shift.size() != dimension) throw std::invalid_argument("shift length differs from D");
    for (double o : data_.shift)
        if (!(o > bounds_.lower && o < bounds_.upper)) throw std::invalid_argument("shift outside the domain");
    if (data_.rotations.size() != rotation_count(info_, dimension, group_size))
        throw std::invalid_argument("wrong number of rotation matrices");
    for (const auto& r : data_.rotations)
        if (r.n != group_size || r.data.size() != group_size * group_size)
            throw std::invalid_argument("rotation matrix has the wrong size");
}

double BenchmarkProblem::grouped_value(std::span<const double> z, std::size_t first, std::size_t group,
                                       std::span<double> scratch_in, std::span<double> scratch_out) const {
    const std::size_t m = groups_.group_size;
    for (std::size_t k = 0; k < m; ++k) scratch_in[k] = z[groups_.permutation[first + k]];
    if (info_.rotated) {
        data_.rotations[group].apply(scratch_in.first(m), scratch_out.first(m));
        return eval_base(info_.base, scratch_out.first(m));
    }
    return eval_base(info_.base, scratch_in.first(m));
}

double BenchmarkProblem::value(std::span<const double> x) const {
    const std::size_t d = groups_.dimension;
    const std::size_t m = groups_.group_size;
    thread_local std::vector<double> z, gathered, rotated;
    z.resize(d);
    gathered.resize(d);
    rotated.resize(m);
    for (std::size_t i = 0; i < d; ++i) z[i] = x[i] - data_.shift[i];

    auto remainder = [&](std::size_t from) {
        const std::size_t len = d - from;
        if (len == 0) return 0.0;
        for (std::size_t k = 0; k < len; ++k) gathered[k] = z[groups_.permutation[from + k]];
        return eval_base(info_.remainder, std::span<const double>(gathered).first(len));
    };

    switch (groups_.separability) {
        case SeparabilityClass::Separable:
        case SeparabilityClass::FullyNonseparable:
            return eval_base(info_.base, z);
        case SeparabilityClass::SingleGroup: {
            const double grouped = grouped_value(z, 0, 0, gathered, rotated);
            return data_.weight * grouped + remainder(m);
        }
        case SeparabilityClass::HalfGroups: {
            double sum = 0.0;
            for (std::size_t k = 0; k < groups_.group_count; ++k)
                sum += grouped_value(z, k * m, k, gathered, rotated);
            return sum + remainder(d / 2);
        }
        case SeparabilityClass::AllGroups: {
            double sum = 0.0;
            for (std::size_t k = 0; k < groups_.group_count; ++k)
                sum += grouped_value(z, k * m, k, gathered, rotated);
            return sum;
        }
    }
    throw std::logic_error("unknown separability class");
}

std::vector<double> BenchmarkProblem::optimum() const {
    std::vector<double> x = data_.shift;
    if (info_.base != BaseFunction::Rosenbrock) return x;
    const std::size_t d = groups_.dimension;
    const std::size_t m = groups_.group_size;
    std::size_t grouped = d;
    if (groups_.separability == SeparabilityClass::SingleGroup) grouped = m;
    if (groups_.separability == SeparabilityClass::HalfGroups) grouped = d / 2;
    for (std::size_t k = 0; k < grouped; ++k) x[groups_.permutation[k]] += 1.0;
    return x;
}

BenchmarkProblem compose_problem(ProblemId id, std::size_t dimension, std::size_t group_size,
                                 std::uint64_t data_seed) {
    return BenchmarkProblem(id, dimension, group_size,
                            generate_problem_data(id, dimension, group_size, data_seed));
}

}  // namespace mabc::bench
