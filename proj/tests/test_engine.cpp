#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <deque>
#include <map>
#include <numeric>
#include <set>

#include "mabc/benchmarks.hpp"
#include "mabc/engine.hpp"

using namespace mabc;

namespace {

// Replays a fixed list of uniforms, then falls back to a seeded stream.
struct ScriptedSource final : RandomSource {
    std::deque<double> script;
    RngStream fallback{12345};
    explicit ScriptedSource(std::initializer_list<double> u) : script(u) {}
    std::uint64_t next_u64() override {
        if (script.empty()) return fallback.next_u64();
        const double u = script.front();
        script.pop_front();
        return static_cast<std::uint64_t>(std::ldexp(u, 53)) << 11;
    }
};

struct ConstantSource final : RandomSource {
    std::uint64_t word;
    explicit ConstantSource(std::uint64_t w) : word(w) {}
    std::uint64_t next_u64() override { return word; }
};

double square_sum(std::span<const double> x) {
    double s = 0;
    for (double v : x) s += v * v;
    return s;
}

Colony colony_of(const std::vector<std::vector<double>>& positions, const std::vector<double>& fitness) {
    Colony c;
    for (std::size_t i = 0; i < positions.size(); ++i) c.members.push_back({positions[i], fitness[i], 0});
    c.refresh_best();
    return c;
}

Colony colony_with_fitness(const std::vector<double>& fitness) {
    std::vector<std::vector<double>> pos;
    for (std::size_t i = 0; i < fitness.size(); ++i) pos.push_back({double(i), -double(i)});
    return colony_of(pos, fitness);
}

}  // namespace

TEST_CASE("default parameters") {
    const MabcConfig c;
    CHECK(c.population_size == 20);
    CHECK(c.crossover_probability == 0.01);
    CHECK(c.local_search_ratio == 0.006);
    CHECK(c.scout_limit == 200);
    CHECK(c.max_evaluations == 3'000'000);
    CHECK(c.onlooker_rule == OnlookerRule::ProseFaithful);
    CHECK(c.switch_rule == SwitchRule::Equation);
    CHECK(c.ls_budget == 100);
    CHECK(c.ls_subspace == 10);
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("config validation") {
    auto bad = [](auto mutate) {
        MabcConfig c;
        mutate(c);
        CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    };
    bad([](MabcConfig& c) { c.population_size = 3; });
    bad([](MabcConfig& c) { c.population_size = 1; });
    bad([](MabcConfig& c) { c.crossover_probability = 1.5; });
    bad([](MabcConfig& c) { c.crossover_probability = -0.1; });
    bad([](MabcConfig& c) { c.local_search_ratio = 2; });
    bad([](MabcConfig& c) { c.scout_limit = 0; });
    bad([](MabcConfig& c) { c.ls_budget = 0; });
    bad([](MabcConfig& c) { c.max_evaluations = 10; });
    CHECK(parse_onlooker_rule("literal") == OnlookerRule::LiteralEq6);
    CHECK(parse_switch_rule("prose") == SwitchRule::Prose);
    CHECK_THROWS_AS(parse_onlooker_rule("roulette"), std::invalid_argument);
}

TEST_CASE("initialisation") {
    SUBCASE("stub generator at one half") {
        FunctionProblem p(6, Bounds::make(0, 1), square_sum);
        MabcConfig cfg;
        cfg.population_size = 5;
        BudgetLedger ledger(100);
        ConstantSource half(1ull << 63);
        const auto c = init_colony(p, cfg, ledger, half);
        for (const auto& m : c.members) {
            CHECK(m.position == std::vector<double>(6, 0.5));
            CHECK(m.trial_counter == 0);
            CHECK(m.fitness == 1.5);
        }
    }
    SUBCASE("NP = 20, D = 1000") {
        const auto p = bench::compose_problem(bench::ProblemId::from_number(1), 1000, 50, 1);
        BudgetLedger ledger(1000);
        RngStream rng(7);
        const auto c = init_colony(p, MabcConfig{}, ledger, rng);
        CHECK(ledger.used() == 20);
        CHECK(c.members.size() == 20);
        double lowest = INFINITY;
        for (const auto& m : c.members) {
            lowest = std::min(lowest, m.fitness);
            for (double v : m.position) CHECK(p.bounds().contains(v));
        }
        CHECK(c.best.fitness == lowest);
        CHECK(c.members[c.best_index].fitness == lowest);
    }
    SUBCASE("documented draw order") {
        FunctionProblem p(3, Bounds::make(-2, 6), square_sum);
        MabcConfig cfg;
        cfg.population_size = 4;
        BudgetLedger ledger(10);
        RngStream a(21), b(21);
        const auto c = init_colony(p, cfg, ledger, a);
        for (const auto& m : c.members)
            for (double v : m.position) CHECK(v == b.uniform() * 8.0 - 2.0);
    }
    SUBCASE("budget below NP") {
        FunctionProblem p(2, Bounds::make(0, 1), square_sum);
        BudgetLedger ledger(10);
        RngStream rng(1);
        CHECK_THROWS_AS(init_colony(p, MabcConfig{}, ledger, rng), BudgetExhausted);
        CHECK(ledger.used() == 0);
    }
}

TEST_CASE("rand/1 donor") {
    SUBCASE("worked example") {
        auto c = colony_of({{9, 9}, {1, 1}, {2, 0}, {0, 2}}, {4, 3, 2, 1});
        // index(4) = floor(4u): 0.3 -> 1, 0.6 -> 2, 0.8 -> 3
        ScriptedSource s{0.3, 0.6, 0.8};
        CHECK(mutate_rand1(c, 0, s) == std::vector<double>{3, -1});
    }
    SUBCASE("equal difference vectors cancel") {
        auto c = colony_of({{9, 9}, {1.5, -4}, {2, 7}, {2, 7}}, {4, 3, 2, 1});
        ScriptedSource s{0.3, 0.6, 0.8};
        CHECK(mutate_rand1(c, 0, s) == std::vector<double>{1.5, -4});
    }
    SUBCASE("collisions are redrawn") {
        auto c = colony_of({{9, 9}, {1, 1}, {2, 0}, {0, 2}}, {4, 3, 2, 1});
        // 0.1 -> 0 (self), 0.3 -> 1, 0.4 -> 1 (repeat), 0.6 -> 2, 0.8 -> 3
        ScriptedSource s{0.1, 0.3, 0.4, 0.6, 0.8};
        CHECK(mutate_rand1(c, 0, s) == std::vector<double>{3, -1});
    }
    SUBCASE("hook sees the indices used") {
        RngStream rng(3);
        std::vector<std::vector<double>> pos;
        for (int i = 0; i < 8; ++i) pos.push_back({rng.uniform(), rng.uniform(), rng.uniform()});
        auto c = colony_of(pos, {1, 2, 3, 4, 5, 6, 7, 8});
        std::vector<std::size_t> seen;
        EngineHooks hooks;
        hooks.on_partners = [&](std::size_t, std::span<const std::size_t> r) { seen.assign(r.begin(), r.end()); };
        for (std::size_t i = 0; i < 8; ++i) {
            const auto v = mutate_rand1(c, i, rng, &hooks);
            for (std::size_t j = 0; j < 3; ++j)
                CHECK(v[j] == pos[seen[0]][j] + (pos[seen[1]][j] - pos[seen[2]][j]));
        }
    }
}

TEST_CASE("partner draws are uniform over ordered triples") {
    RngStream rng(2718);
    std::map<std::vector<std::size_t>, int> counts;
    const int draws = 10000;
    for (int k = 0; k < draws; ++k) {
        const auto r = draw_partners(5, 0, 3, rng);
        CHECK(std::set<std::size_t>(r.begin(), r.end()).size() == 3);
        CHECK(std::find(r.begin(), r.end(), 0) == r.end());
        ++counts[r];
    }
    CHECK(counts.size() == 24);
    const double expected = draws / 24.0;
    double chi2 = 0;
    for (const auto& [_, n] : counts) chi2 += (n - expected) * (n - expected) / expected;
    CHECK(chi2 < 41.638);  // chi-square upper 1% point, 23 degrees of freedom
    CHECK_THROWS_AS(draw_partners(3, 0, 3, rng), std::invalid_argument);
}

TEST_CASE("current-to-best donor") {
    // best is member 1; target 0; partners 2 and 3
    auto c = colony_of({{5, 5}, {1, 2}, {4, 0}, {1, 1}}, {3, 1, 4, 5});
    REQUIRE(c.best_index == 1);
    ScriptedSource s{0.6, 0.8};
    CHECK(mutate_current_to_best(c, 0, s) == std::vector<double>{1 + 3, 2 - 1});

    ScriptedSource again{0.6, 0.8};
    const auto at_best = mutate_current_to_best(c, 1, again);
    CHECK(at_best == std::vector<double>{1 + 3, 2 - 1});
}

TEST_CASE("crossover") {
    const auto b = Bounds::make(-10, 10);
    RngStream rng(5);
    std::vector<double> x(40), v(40);
    for (std::size_t j = 0; j < 40; ++j) {
        x[j] = rng.uniform() * 4 - 2;
        v[j] = x[j] + 1 + rng.uniform();
    }
    SUBCASE("CR = 0 changes exactly the forced coordinate") {
        for (int k = 0; k < 100; ++k) {
            const auto u = crossover(x, v, 0.0, b, rng);
            int changed = 0;
            for (std::size_t j = 0; j < 40; ++j) changed += u[j] != x[j];
            CHECK(changed == 1);
        }
    }
    SUBCASE("CR = 1 takes the clamped donor") {
        auto far = v;
        far[3] = 50;
        far[7] = -80;
        const auto u = crossover(x, far, 1.0, b, rng);
        CHECK(u == clamp_to_bounds(far, b));
    }
    SUBCASE("unselected coordinates are bit-identical") {
        for (int k = 0; k < 200; ++k) {
            const auto u = crossover(x, v, 0.2, b, rng);
            for (std::size_t j = 0; j < 40; ++j)
                CHECK((std::memcmp(&u[j], &x[j], sizeof(double)) == 0 || u[j] == v[j]));
        }
    }
    SUBCASE("forced coordinate is drawn first") {
        ScriptedSource s{0.5};  // index(40) = 20, then uniforms from the fallback stream
        std::vector<double> far(40, 9.0);
        const auto u = crossover(x, far, 0.0, b, s);
        CHECK(u[20] == 9.0);
    }
    CHECK_THROWS_AS(crossover(x, std::vector<double>(3), 0.5, b, rng), std::invalid_argument);
}

TEST_CASE("crossover at CR = 0.01, D = 1000 modifies about ten coordinates") {
    const auto b = Bounds::make(-100, 100);
    std::vector<double> x(1000, 0.0), v(1000, 1.0);
    RngStream rng(1);
    double total = 0;
    for (int k = 0; k < 1000; ++k) {
        const auto u = crossover(x, v, 0.01, b, rng);
        total += static_cast<double>(std::count(u.begin(), u.end(), 1.0));
    }
    const double mean = total / 1000;
    MESSAGE("mean modified coordinates: " << mean);
    CHECK(std::abs(mean - 10.0) <= 1.0);
    // Exact expectation: the forced coordinate plus Binomial(999, 0.01).
    CHECK(std::abs(1 + 999 * 0.01 - 10.0) <= 1.0);
}

TEST_CASE("crossover count is unbiased over many trials") {
    const auto b = Bounds::make(-100, 100);
    std::vector<double> x(1000, 0.0), v(1000, 1.0);
    RngStream rng(77);
    const int trials = 100000;
    double total = 0;
    for (int k = 0; k < trials; ++k) {
        const auto u = crossover(x, v, 0.01, b, rng);
        total += static_cast<double>(std::count(u.begin(), u.end(), 1.0));
    }
    const double expected = 1 + 999 * 0.01;
    const double sd = std::sqrt(999 * 0.01 * 0.99 / trials);
    CHECK(std::abs(total / trials - expected) <= 4 * sd);
}

TEST_CASE("greedy selection") {
    FunctionProblem p(1, Bounds::make(-5, 5), square_sum);
    BudgetLedger ledger(3);
    const Solution inc{{2.0}, 4.0, 7};

    const auto tie = select_greedy(inc, {-2.0}, p, ledger);
    CHECK(tie.position == std::vector{-2.0});
    CHECK(tie.trial_counter == 0);

    const auto worse = select_greedy(inc, {3.0}, p, ledger);
    CHECK(worse.position == std::vector{2.0});
    CHECK(worse.fitness == 4.0);
    CHECK(worse.trial_counter == 8);

    const auto better = select_greedy(inc, {1.0}, p, ledger);
    CHECK(better.fitness == 1.0);
    CHECK(ledger.used() == 3);
    CHECK_THROWS_AS(select_greedy(inc, {0.0}, p, ledger), BudgetExhausted);
}

TEST_CASE("employed phase") {
    const auto p = bench::compose_problem(bench::ProblemId::from_number(5), 20, 5, 2);
    MabcConfig cfg;
    BudgetLedger ledger(100000);
    RngStream rng(11);
    auto c = init_colony(p, cfg, ledger, rng);
    for (int g = 0; g < 30; ++g) {
        const double before = c.best.fitness;
        std::vector<double> fitness_before;
        for (const auto& m : c.members) fitness_before.push_back(m.fitness);
        const auto used = ledger.used();
        employed_phase(c, p, cfg, ledger, rng);
        CHECK(ledger.used() - used == 20);
        CHECK(c.best.fitness <= before);
        for (std::size_t i = 0; i < 20; ++i) CHECK(c.members[i].fitness <= fitness_before[i]);
    }
}

TEST_CASE("onlooker probability") {
    const auto c = colony_with_fitness({1, 2, 3, 1.5});
    CHECK(onlooker_probability(c, 0) == 1.0);
    CHECK(onlooker_probability(c, 2) == 0.0);
    CHECK(onlooker_probability(c, 1) == 0.5);
    CHECK(onlooker_probability(colony_with_fitness({4, 4, 4, 4}), 2) == 1.0);

    SUBCASE("shift invariance") {
        RngStream rng(4);
        std::vector<double> f(10);
        for (double& v : f) v = rng.uniform() * 100;
        auto shifted = f;
        for (double& v : shifted) v += 12345.0;
        const auto a = colony_with_fitness(f), b = colony_with_fitness(shifted);
        for (std::size_t i = 0; i < 10; ++i)
            CHECK(std::abs(onlooker_probability(a, i) - onlooker_probability(b, i)) <= 1e-12);
        CHECK(std::abs(fitness_diversity(a) - fitness_diversity(b)) <= 1e-12);
    }
}

TEST_CASE("onlooker phase") {
    FunctionProblem p(4, Bounds::make(-5, 5), square_sum);

    SUBCASE("exactly NP placements") {
        MabcConfig cfg;
        for (auto rule : {OnlookerRule::ProseFaithful, OnlookerRule::LiteralEq6}) {
            cfg.onlooker_rule = rule;
            BudgetLedger ledger(10000);
            RngStream rng(8);
            auto c = init_colony(p, cfg, ledger, rng);
            for (int g = 0; g < 20; ++g) {
                const auto used = ledger.used();
                const double best = c.best.fitness;
                CHECK(onlooker_phase(c, p, cfg, ledger, rng) == 20);
                CHECK(ledger.used() - used == 20);
                CHECK(c.best.fitness <= best);
            }
        }
    }
    SUBCASE("flat colony under the prose rule visits every source in turn") {
        FunctionProblem flat(2, Bounds::make(-1, 1), [](std::span<const double>) { return 1.0; });
        MabcConfig cfg;
        cfg.population_size = 6;
        BudgetLedger ledger(100);
        RngStream rng(2);
        auto c = init_colony(flat, cfg, ledger, rng);
        std::vector<std::size_t> targets;
        EngineHooks hooks;
        hooks.on_partners = [&](std::size_t i, std::span<const std::size_t>) { targets.push_back(i); };
        CHECK(onlooker_phase(c, flat, cfg, ledger, rng, &hooks) == 6);
        CHECK(targets == std::vector<std::size_t>{0, 1, 2, 3, 4, 5});
    }
    SUBCASE("flat colony under the literal rule ends after one idle scan") {
        FunctionProblem flat(2, Bounds::make(-1, 1), [](std::span<const double>) { return 1.0; });
        MabcConfig cfg;
        cfg.population_size = 6;
        cfg.onlooker_rule = OnlookerRule::LiteralEq6;
        BudgetLedger ledger(100);
        RngStream rng(2);
        auto c = init_colony(flat, cfg, ledger, rng);
        CHECK(onlooker_phase(c, flat, cfg, ledger, rng) == 0);
        CHECK(ledger.used() == 6);
    }
    SUBCASE("richer sources get more onlookers") {
        // Trials are never accepted, so the fitness stays fixed.
        FunctionProblem never(2, Bounds::make(-1, 1), [](std::span<const double>) { return INFINITY; });
        for (auto rule : {OnlookerRule::ProseFaithful, OnlookerRule::LiteralEq6}) {
            MabcConfig cfg;
            cfg.population_size = 6;
            cfg.onlooker_rule = rule;
            auto c = colony_of({{0, 0}, {.1, 0}, {.2, 0}, {.3, 0}, {.4, 0}, {.5, 0}}, {1, 2, 3, 4, 5, 6});
            std::vector<int> visits(6, 0);
            EngineHooks hooks;
            hooks.on_partners = [&](std::size_t i, std::span<const std::size_t>) { ++visits[i]; };
            BudgetLedger ledger(1'000'000);
            RngStream rng(13);
            for (int g = 0; g < 500; ++g) onlooker_phase(c, never, cfg, ledger, rng, &hooks);
            if (rule == OnlookerRule::ProseFaithful) {
                CHECK(visits[0] > visits[5]);
                CHECK(visits[5] == 0);
            } else {
                CHECK(visits[5] > visits[0]);
                CHECK(visits[0] == 0);
            }
        }
    }
}

TEST_CASE("fitness diversity") {
    CHECK(fitness_diversity(colony_with_fitness({1, 2, 3})) == 0.5);
    CHECK(fitness_diversity(colony_with_fitness({7, 7, 7, 7})) == 1.0);
    // avg close to best -> near 1; avg close to worst -> near 0
    CHECK(fitness_diversity(colony_with_fitness({0, 0, 0, 0, 0, 0, 0, 0, 0, 1})) == doctest::Approx(0.9));
    CHECK(fitness_diversity(colony_with_fitness({0, 1, 1, 1, 1, 1, 1, 1, 1, 1})) == doctest::Approx(0.1));
    RngStream rng(3);
    for (int k = 0; k < 200; ++k) {
        std::vector<double> f(8);
        for (double& v : f) v = std::exp(rng.normal() * 5);
        const double psi = fitness_diversity(colony_with_fitness(f));
        CHECK(psi >= 0.0);
        CHECK(psi <= 1.0);
    }
}

TEST_CASE("balance probability") {
    DiversityTracker t;
    CHECK(balance_probability(t) == 1.0);
    t.push(0.4);
    CHECK(balance_probability(t) == 1.0);  // sigma = 0

    DiversityTracker u;
    u.push(0.1);
    u.push(0.6);  // mean 0.35, sample variance 0.125: psi = mean + 2 sigma^2
    CHECK(u.mean() == doctest::Approx(0.35));
    CHECK(u.variance() == doctest::Approx(0.125));
    CHECK(balance_probability(u) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

    DiversityTracker w;
    w.push(0.9);
    w.push(0.2);  // below the mean: raw value above 1
    CHECK(balance_probability(w) == 1.0);

    DiversityTracker e;
    e.push(0.3);
    e.push(0.5);
    e.push(0.4);  // psi equals the mean
    CHECK(balance_probability(e) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("diversity tracker matches batch statistics") {
    RngStream rng(77);
    DiversityTracker t;
    std::vector<double> seen;
    for (int k = 0; k < 500; ++k) {
        const double psi = rng.uniform();
        t.push(psi);
        seen.push_back(psi);
        const double n = double(seen.size());
        const double mean = std::accumulate(seen.begin(), seen.end(), 0.0) / n;
        double ss = 0;
        for (double v : seen) ss += (v - mean) * (v - mean);
        CHECK(std::abs(t.mean() - mean) <= 1e-12);
        CHECK(std::abs(t.variance() - (seen.size() > 1 ? ss / (n - 1) : 0.0)) <= 1e-12);
    }
}

TEST_CASE("switch rule") {
    for (double draw : {0.0, 0.3, 0.999}) {
        CHECK(choose_local_search(1.0, draw, SwitchRule::Equation) == LocalSearchKind::RandomWalk);
        CHECK(choose_local_search(1.0, draw, SwitchRule::Prose) == LocalSearchKind::NelderMead);
    }
    CHECK(choose_local_search(0.0, 0.3, SwitchRule::Equation) == LocalSearchKind::NelderMead);
    CHECK(choose_local_search(0.0, 0.3, SwitchRule::Prose) == LocalSearchKind::RandomWalk);
    CHECK(choose_local_search(0.5, 0.7, SwitchRule::Equation) == LocalSearchKind::NelderMead);
    CHECK(choose_local_search(0.5, 0.2, SwitchRule::Equation) == LocalSearchKind::RandomWalk);
}

TEST_CASE("local improvement of the best") {
    const auto p = bench::compose_problem(bench::ProblemId::from_number(1), 20, 5, 3);

    SUBCASE("ratio 0 never searches but still records psi") {
        MabcConfig cfg;
        cfg.local_search_ratio = 0;
        BudgetLedger ledger(100000);
        RngStream rng(1);
        auto c = init_colony(p, cfg, ledger, rng);
        for (int g = 0; g < 1000; ++g) CHECK_FALSE(local_improve_best(c, p, cfg, ledger, rng).ran);
        CHECK(ledger.used() == 20);
        CHECK(c.diversity.count() == 1000);
    }
    SUBCASE("stubbed balance selects the branch") {
        for (double stub : {0.0, 1.0}) {
            MabcConfig cfg;
            cfg.local_search_ratio = 1;
            BudgetLedger ledger(1'000'000);
            RngStream rng(2);
            auto c = init_colony(p, cfg, ledger, rng);
            EngineHooks hooks;
            hooks.override_balance = [&](double) { return stub; };
            for (int g = 0; g < 50; ++g) {
                const double before = c.best.fitness;
                const auto used = ledger.used();
                const auto r = local_improve_best(c, p, cfg, ledger, rng, &hooks);
                CHECK(r.ran);
                CHECK(r.kind == (stub == 1.0 ? LocalSearchKind::RandomWalk : LocalSearchKind::NelderMead));
                CHECK(r.evaluations == ledger.used() - used);
                CHECK(r.evaluations <= cfg.ls_budget);
                CHECK(c.best.fitness <= before);
                CHECK(r.improved == (c.best.fitness < before));
                CHECK(c.members[c.best_index].fitness == c.best.fitness);
            }
        }
    }
    SUBCASE("invocation count at the default ratio") {
        // 75,000 generations x 0.006 = 450 expected, binomial sd about 21.
        FunctionProblem tiny(2, Bounds::make(-1, 1), square_sum);
        MabcConfig cfg;
        cfg.population_size = 4;
        cfg.ls_budget = 3;
        BudgetLedger ledger(1'000'000);
        RngStream rng(6);
        auto c = init_colony(tiny, cfg, ledger, rng);
        int ran = 0;
        for (int g = 0; g < 75'000; ++g) ran += local_improve_best(c, tiny, cfg, ledger, rng).ran;
        CHECK(std::abs(ran - 450) <= 3 * 21);
    }
    SUBCASE("subspace too small for a simplex falls back to the walk") {
        FunctionProblem one(1, Bounds::make(-1, 1), square_sum);
        MabcConfig cfg;
        cfg.population_size = 4;
        cfg.local_search_ratio = 1;
        BudgetLedger ledger(10000);
        RngStream rng(6);
        auto c = init_colony(one, cfg, ledger, rng);
        EngineHooks hooks;
        hooks.override_balance = [](double) { return 0.0; };
        CHECK(local_improve_best(c, one, cfg, ledger, rng, &hooks).kind == LocalSearchKind::RandomWalk);
    }
}

TEST_CASE("scouts") {
    FunctionProblem p(3, Bounds::make(-1, 1), square_sum);
    MabcConfig cfg;
    cfg.population_size = 5;
    cfg.scout_limit = 10;
    BudgetLedger ledger(1000);
    RngStream rng(4);
    auto c = init_colony(p, cfg, ledger, rng);

    SUBCASE("nothing stale") {
        const auto before = c.members;
        CHECK(scout_phase(c, p, cfg, ledger, rng) == 0);
        CHECK(ledger.used() == 5);
        for (std::size_t i = 0; i < 5; ++i) CHECK(c.members[i].position == before[i].position);
    }
    SUBCASE("one stale member") {
        const std::size_t stale = (c.best_index + 1) % 5;
        c.members[stale].trial_counter = 10;
        const auto old = c.members[stale].position;
        CHECK(scout_phase(c, p, cfg, ledger, rng) == 1);
        CHECK(ledger.used() == 6);
        CHECK(c.members[stale].trial_counter == 0);
        CHECK(c.members[stale].position != old);
        CHECK(c.members[stale].fitness == square_sum(c.members[stale].position));
    }
    SUBCASE("stale best is exempt") {
        const double best = c.best.fitness;
        c.members[c.best_index].trial_counter = 1000;
        CHECK(scout_phase(c, p, cfg, ledger, rng) == 0);
        CHECK(c.best.fitness == best);
        CHECK(c.members[c.best_index].trial_counter == 1000);
    }
}

TEST_CASE("run") {
    const auto p = bench::compose_problem(bench::ProblemId::from_number(11), 30, 5, 8);

    SUBCASE("initialisation-only budget") {
        MabcConfig cfg;
        cfg.max_evaluations = 20;
        const auto r = run(p, cfg, 3, {"F11", {20}, 1000});
        BudgetLedger ledger(20);
        RngStream rng(3);
        const auto c = init_colony(p, cfg, ledger, rng);
        CHECK(r.final_error == c.best.fitness);
        CHECK(r.checkpoint_errors == std::vector<TracePoint>{{20, c.best.fitness}});
    }
    SUBCASE("deterministic") {
        MabcConfig cfg;
        cfg.max_evaluations = 20000;
        cfg.local_search_ratio = 0.1;
        const RunOptions opt{"F11", {4000, 20000}, 500};
        CHECK(run(p, cfg, 42, opt) == run(p, cfg, 42, opt));
        CHECK_FALSE(run(p, cfg, 42, opt) == run(p, cfg, 43, opt));
    }
    SUBCASE("phase accounting") {
        MabcConfig cfg;
        cfg.max_evaluations = 20000;
        cfg.local_search_ratio = 0.05;
        cfg.scout_limit = 30;
        std::uint64_t total = cfg.population_size;
        bool scouted = false, searched = false;
        EngineHooks hooks;
        hooks.on_generation = [&](const GenerationReport& g) {
            CHECK(g.employed_evaluations == 20);
            CHECK(g.onlooker_evaluations == 20);
            CHECK(g.onlooker_placements == 20);
            CHECK(g.scout_evaluations == g.scouted);
            CHECK(g.local_evaluations <= (g.local_search_ran ? cfg.ls_budget : 0u));
            CHECK(g.psi >= 0.0);
            CHECK(g.psi <= 1.0);
            scouted = scouted || g.scouted > 0;
            searched = searched || g.local_search_ran;
            total += g.employed_evaluations + g.onlooker_evaluations + g.local_evaluations + g.scout_evaluations;
        };
        const auto r = run(p, cfg, 5, {"F11", {20000}, 0}, &hooks);
        CHECK(scouted);
        CHECK(searched);
        CHECK(total <= 20000);
        CHECK(r.checkpoint_errors.back().evaluations == 20000);
    }
}
