#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "svmpso/swarm.hpp"

using namespace svmpso;

namespace {

/// Uniform-source stub that returns a fixed value, pinning the random
/// factors in the velocity-update examples.
struct FixedSource {
    double value;
    double open01() { return value; }
};

Particle particle_at(int type, double x1, double x2, double c) {
    Particle p;
    p.type = type;
    p.pos = {x1, x2, c};
    p.best_type = type;
    p.best_pos = p.pos;
    p.best_fitness = 0.0;
    return p;
}

std::pair<Dataset, Dataset> toy_split(std::uint64_t seed = 3) {
    const Dataset ds = make_separable_2d(48, seed, 0.15);
    SplitSpec split;
    split.train_fraction = 0.75;
    split.seed = 1;
    return stratified_split(ds, split);
}

SwarmConfig small_cfg(std::uint64_t seed) {
    SwarmConfig cfg;
    cfg.particles = 12;
    cfg.max_iters = 3;
    cfg.seed = seed;
    cfg.fitness_mode = FitnessMode::combined_accuracy;
    return cfg;
}

TrainConfig fast_solver() {
    TrainConfig cfg;
    cfg.max_passes = 5;
    return cfg;
}

bool reports_equal(const SearchReport& a, const SearchReport& b) {
    if (a.mode != b.mode || a.best_type != b.best_type ||
        a.best_fitness != b.best_fitness || a.fitness_evaluations != b.fitness_evaluations)
        return false;
    if (a.best_pos.x1 != b.best_pos.x1 || a.best_pos.x2 != b.best_pos.x2 ||
        a.best_pos.c != b.best_pos.c)
        return false;
    if (a.per_iteration.size() != b.per_iteration.size() || a.trace.size() != b.trace.size())
        return false;
    for (std::size_t i = 0; i < a.per_iteration.size(); ++i) {
        const IterationStat &s = a.per_iteration[i], &t = b.per_iteration[i];
        if (s.best_fitness != t.best_fitness || s.best_type != t.best_type ||
            s.regenerated != t.regenerated || s.best_pos.x1 != t.best_pos.x1 ||
            s.best_pos.c != t.best_pos.c)
            return false;
    }
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
        const TraceRecord &s = a.trace[i], &t = b.trace[i];
        if (s.type != t.type || s.x1 != t.x1 || s.x2 != t.x2 || s.c != t.c ||
            s.fitness != t.fitness || s.regenerated != t.regenerated)
            return false;
    }
    if (a.best_model.bias != b.best_model.bias ||
        a.best_model.alphas != b.best_model.alphas)
        return false;
    return true;
}

}  // namespace

TEST_CASE("constriction coefficient matches the hand-computed value") {
    // K=0.3, phi = 2+5 = 7: chi = 0.6/|2-7-sqrt(21)| ~ 0.06261
    CHECK(std::abs(constriction(0.3, 2.0, 5.0) - 0.06261) <= 1e-4);
}

TEST_CASE("constriction is linear in K") {
    CHECK(2.0 * constriction(0.15, 2.0, 5.0) ==
          Catch::Approx(constriction(0.3, 2.0, 5.0)).epsilon(1e-15));
}

TEST_CASE("constriction rejects phi <= 4 and K outside (0,1)") {
    CHECK_THROWS_AS(constriction(0.3, 2.0, 2.0), ConfigError);  // phi = 4 exactly
    CHECK_THROWS_AS(constriction(0.3, 1.0, 2.0), ConfigError);
    CHECK_THROWS_AS(constriction(0.0, 2.0, 5.0), ConfigError);
    CHECK_THROWS_AS(constriction(1.0, 2.0, 5.0), ConfigError);
}

TEST_CASE("constriction grows strictly with K") {
    for (double phi_p : {2.0, 3.0}) {
        for (double phi_g : {2.5, 5.0}) {
            if (phi_p + phi_g <= 4.0)
                continue;
            double prev = 0.0;
            for (double k : {0.1, 0.3, 0.5, 0.7, 0.9}) {
                const double chi = constriction(k, phi_p, phi_g);
                CHECK(chi > prev);
                prev = chi;
            }
        }
    }
}

TEST_CASE("classic velocity update is inert at the shared optimum") {
    Particle p = particle_at(2, 4.0, 0.0, 3.0);
    p.vel = {0.25, 0.0, -0.5};
    const Velocity before = p.vel;
    Rng rng(1);  // genuine randomness: both difference terms are zero anyway
    velocity_update_classic(p, p.pos, 2.0, 5.0, rng);
    CHECK(p.vel.v1 == before.v1);
    CHECK(p.vel.v2 == before.v2);
    CHECK(p.vel.v3 == before.v3);
}

TEST_CASE("classic velocity update with zero random factors changes nothing") {
    Particle p = particle_at(2, 4.0, 0.0, 3.0);
    p.best_pos = {6.0, 0.0, 1.0};
    p.vel = {0.25, 0.0, -0.5};
    FixedSource zero{0.0};
    velocity_update_classic(p, Position{9.0, 0.0, 9.0}, 2.0, 5.0, zero);
    CHECK(p.vel.v1 == 0.25);
    CHECK(p.vel.v3 == -0.5);
}

TEST_CASE("classic velocity update, forced r=1, unit offsets") {
    // v=0, personal and global offsets both (1,0,0), phi = 2 and 5 -> v=(7,0,0)
    Particle p = particle_at(2, 4.0, 0.0, 3.0);
    p.best_pos = {5.0, 0.0, 3.0};
    p.vel = {0.0, 0.0, 0.0};
    FixedSource one{1.0};
    velocity_update_classic(p, Position{5.0, 0.0, 3.0}, 2.0, 5.0, one);
    CHECK(p.vel.v1 == 7.0);
    CHECK(p.vel.v2 == 0.0);
    CHECK(p.vel.v3 == 0.0);
}

TEST_CASE("canonical velocity update decays toward the shared optimum") {
    Particle p = particle_at(2, 4.0, 0.0, 3.0);
    p.vel = {1.0, 0.0, -2.0};
    const double chi = constriction(0.3, 2.0, 5.0);
    Rng rng(5);
    velocity_update_canonical(p, p.pos, chi, 2.0, 5.0, rng);
    CHECK(p.vel.v1 == chi * 1.0);
    CHECK(p.vel.v3 == chi * -2.0);
}

TEST_CASE("canonical velocity update compresses the classic example by chi") {
    Particle p = particle_at(2, 4.0, 0.0, 3.0);
    p.best_pos = {5.0, 0.0, 3.0};
    p.vel = {0.0, 0.0, 0.0};
    const double chi = constriction(0.3, 2.0, 5.0);
    FixedSource one{1.0};
    velocity_update_canonical(p, Position{5.0, 0.0, 3.0}, chi, 2.0, 5.0, one);
    CHECK(std::abs(p.vel.v1 - 0.4383) <= 1e-3);  // chi * 7
}

TEST_CASE("x2 never moves for a kernel type whose range is [0,0]") {
    const ParamRanges ranges;
    Rng rng(11);
    Particle p;
    detail::init_particle(p, 2, ranges, rng);
    CHECK(p.pos.x2 == 0.0);
    CHECK(p.vel.v2 == 0.0);
    for (int it = 0; it < 5; ++it) {
        velocity_update_canonical(p, Position{3.0, 0.0, 5.0}, 0.06, 2.0, 5.0, rng);
        position_update(p, ranges.rbf);
        CHECK(p.pos.x2 == 0.0);
        CHECK(p.vel.v2 == 0.0);
    }
}

TEST_CASE("position update adds velocity then clamps") {
    const ParamRanges ranges;  // rbf: x1 in [0.1,10], c in [0.1,10]

    Particle p = particle_at(2, 5.0, 0.0, 5.0);
    p.vel = {1.5, 0.0, -2.0};
    position_update(p, ranges.rbf);
    CHECK(p.pos.x1 == 6.5);
    CHECK(p.pos.c == 3.0);
    CHECK(p.vel.v1 == 1.5);  // no clamp, velocity kept

    Particle q = particle_at(2, 9.8, 0.0, 0.2);
    q.vel = {1.0, 0.0, -0.5};
    position_update(q, ranges.rbf);
    CHECK(q.pos.x1 == 10.0);  // sigma clamped at the top
    CHECK(q.vel.v1 == 0.0);   // clamped coordinate loses its velocity
    CHECK(q.pos.c == 0.1);    // C clamped at the bottom
    CHECK(q.vel.v3 == 0.0);
}

TEST_CASE("kernel decoding rounds the degree and maps sigmoid coordinates") {
    const KernelSpec poly = decode_kernel(1, {3.4, 0.0, 1.0});
    CHECK(poly.kind == KernelKind::polynomial);
    CHECK(poly.degree == 3);
    CHECK(decode_kernel(1, {3.6, 0.0, 1.0}).degree == 4);

    const KernelSpec rbf = decode_kernel(2, {4.01, 0.0, 9.83});
    CHECK(rbf.kind == KernelKind::rbf);
    CHECK(rbf.sigma == 4.01);

    // x1 carries k2 (negative), x2 carries k1 (positive)
    const KernelSpec sig = decode_kernel(3, {-2.5, 1.5, 1.0});
    CHECK(sig.kind == KernelKind::sigmoid);
    CHECK(sig.k2 == -2.5);
    CHECK(sig.k1 == 1.5);

    CHECK_THROWS_AS(decode_kernel(0, {1.0, 0.0, 1.0}), ConfigError);
    CHECK_THROWS_AS(decode_kernel(4, {1.0, 0.0, 1.0}), ConfigError);
}

TEST_CASE("range validation catches inverted and ill-signed boxes") {
    ParamRanges r;
    CHECK_NOTHROW(r.validate());

    ParamRanges bad = r;
    bad.rbf.x1_min = 5.0;
    bad.rbf.x1_max = 1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = r;
    bad.polynomial.x2_max = 1.0;  // x2 must stay [0,0] for polynomial
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = r;
    bad.sigmoid.x1_max = 0.5;  // k2 range must stay negative
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = r;
    bad.rbf.c_min = 0.0;  // C must stay positive
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("regeneration converts exactly the quota of worst off-type particles") {
    // m=10, p=20 -> floor(2.0)=2; 6 particles are eligible (type != 2)
    std::vector<Particle> swarm;
    for (int i = 0; i < 10; ++i) {
        Particle p = particle_at(i < 6 ? 1 : 2, 4.0, 0.0, 5.0);
        p.best_fitness = 50.0 + i;  // worst eligible: indices 0 and 1
        swarm.push_back(p);
    }
    const ParamRanges ranges;
    Rng rng(21);
    const auto regenerated = regenerate(swarm, 2, 20.0, ranges, rng);
    REQUIRE(regenerated == std::vector<std::size_t>{0, 1});
    for (std::size_t i : regenerated) {
        CHECK(swarm[i].type == 2);
        CHECK(swarm[i].pos.x1 >= ranges.rbf.x1_min);
        CHECK(swarm[i].pos.x1 <= ranges.rbf.x1_max);
        CHECK(swarm[i].pos.x2 == 0.0);
        CHECK(swarm[i].pos.c >= ranges.rbf.c_min);
        CHECK(swarm[i].pos.c <= ranges.rbf.c_max);
        CHECK(std::isinf(swarm[i].best_fitness));  // stale until re-evaluated
        CHECK(swarm[i].best_pos.x1 == swarm[i].pos.x1);
    }
    // untouched particles keep their state
    CHECK(swarm[2].type == 1);
    CHECK(swarm[2].best_fitness == 52.0);
}

TEST_CASE("regeneration is a no-op when every particle has the best type") {
    std::vector<Particle> swarm(5, particle_at(2, 4.0, 0.0, 5.0));
    const ParamRanges ranges;
    Rng rng(22);
    CHECK(regenerate(swarm, 2, 20.0, ranges, rng).empty());
    for (const Particle& p : swarm)
        CHECK(p.type == 2);
}

TEST_CASE("regeneration quota is capped by the eligible count") {
    // m=10, p=80 -> quota 8, but only 3 eligible
    std::vector<Particle> swarm;
    for (int i = 0; i < 10; ++i)
        swarm.push_back(particle_at(i < 3 ? 3 : 2, 4.0, 0.0, 5.0));
    const ParamRanges ranges;
    Rng rng(23);
    CHECK(regenerate(swarm, 2, 80.0, ranges, rng).size() == 3);
}

TEST_CASE("zero regeneration percent disables regeneration") {
    std::vector<Particle> swarm;
    for (int i = 0; i < 6; ++i)
        swarm.push_back(particle_at(1 + i % 3, 4.0, 0.0, 5.0));
    const ParamRanges ranges;
    Rng rng(24);
    CHECK(regenerate(swarm, 2, 0.0, ranges, rng).empty());
}

TEST_CASE("swarm config validation") {
    SwarmConfig cfg;
    cfg.particles = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = SwarmConfig{};
    cfg.regen_percent = 150.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = SwarmConfig{};
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("modified search: evaluation count, monotone best, in-range positions") {
    auto [train_set, test_set] = toy_split();
    const ParamRanges ranges;
    const SwarmConfig cfg = small_cfg(31);
    const SearchReport r =
        modified_search(train_set, test_set, ranges, cfg, fast_solver());

    CHECK(r.fitness_evaluations == cfg.particles * (cfg.max_iters + 1));
    REQUIRE(r.per_iteration.size() == cfg.max_iters + 1);

    double prev = -std::numeric_limits<double>::infinity();
    for (const IterationStat& st : r.per_iteration) {
        CHECK(st.best_fitness >= prev);
        prev = st.best_fitness;
    }
    CHECK(r.best_fitness == r.per_iteration.back().best_fitness);
    CHECK(r.best_fitness > 0.0);
    CHECK(r.best_type >= 1);
    CHECK(r.best_type <= 3);

    // clamping invariant, checked from the trace
    for (const TraceRecord& t : r.trace) {
        const TypeRange& box = ranges.for_type(t.type);
        CHECK(t.x1 >= box.x1_min);
        CHECK(t.x1 <= box.x1_max);
        CHECK(t.x2 >= box.x2_min);
        CHECK(t.x2 <= box.x2_max);
        CHECK(t.c >= box.c_min);
        CHECK(t.c <= box.c_max);
    }

    // initialization spreads particles evenly over the three types
    std::size_t counts[3] = {0, 0, 0};
    for (const TraceRecord& t : r.trace)
        if (t.iteration == 0)
            ++counts[t.type - 1];
    CHECK(counts[0] == cfg.particles / 3);
    CHECK(counts[1] == cfg.particles / 3);
    CHECK(counts[2] == cfg.particles / 3);
}

TEST_CASE("modified search regeneration bookkeeping is exact") {
    auto [train_set, test_set] = toy_split(9);
    const ParamRanges ranges;
    SwarmConfig cfg = small_cfg(77);
    cfg.particles = 9;
    cfg.max_iters = 4;
    cfg.regen_percent = 25.0;  // floor(0.25*9) = 2 per iteration
    const SearchReport r =
        modified_search(train_set, test_set, ranges, cfg, fast_solver());

    const std::size_t m = cfg.particles;
    for (std::size_t iter = 1; iter <= cfg.max_iters; ++iter) {
        const IterationStat& before = r.per_iteration[iter - 1];
        // types entering this iteration = trace rows of the previous one
        std::size_t eligible = 0;
        for (std::size_t i = 0; i < m; ++i)
            if (r.trace[(iter - 1) * m + i].type != before.best_type)
                ++eligible;
        const std::size_t expected =
            std::min<std::size_t>(static_cast<std::size_t>(cfg.regen_percent * m / 100.0),
                                  eligible);
        CHECK(r.per_iteration[iter].regenerated == expected);

        std::size_t flagged = 0;
        for (std::size_t i = 0; i < m; ++i) {
            const TraceRecord& t = r.trace[iter * m + i];
            if (t.regenerated) {
                ++flagged;
                CHECK(t.type == before.best_type);  // converted to the leading type
            }
        }
        CHECK(flagged == expected);
    }
}

TEST_CASE("modified search is deterministic and thread-count independent") {
    auto [train_set, test_set] = toy_split();
    const ParamRanges ranges;
    const SwarmConfig cfg = small_cfg(55);

    const SearchReport a = modified_search(train_set, test_set, ranges, cfg, fast_solver());
    const SearchReport b = modified_search(train_set, test_set, ranges, cfg, fast_solver());
    CHECK(reports_equal(a, b));

    SwarmConfig parallel = cfg;
    parallel.threads = 4;
    const SearchReport c =
        modified_search(train_set, test_set, ranges, parallel, fast_solver());
    CHECK(reports_equal(a, c));

    SwarmConfig other = cfg;
    other.seed = 56;
    const SearchReport d = modified_search(train_set, test_set, ranges, other, fast_solver());
    CHECK_FALSE(reports_equal(a, d));
}

TEST_CASE("traditional search runs one leg per kernel type") {
    auto [train_set, test_set] = toy_split();
    const ParamRanges ranges;
    const SwarmConfig cfg = small_cfg(41);
    const SearchReport r = traditional_search(train_set, test_set, {1, 2, 3}, ranges, cfg,
                                              fast_solver());

    REQUIRE(r.per_run.size() == 3);
    CHECK(r.fitness_evaluations == 3 * cfg.particles * (cfg.max_iters + 1));
    for (std::size_t l = 0; l < 3; ++l) {
        const SearchReport& leg = r.per_run[l];
        CHECK(leg.best_type == static_cast<int>(l + 1));
        CHECK(leg.fitness_evaluations == cfg.particles * (cfg.max_iters + 1));
        for (const TraceRecord& t : leg.trace)
            CHECK(t.type == static_cast<int>(l + 1));
    }
    // the combined best is the best leg's best
    double top = -std::numeric_limits<double>::infinity();
    for (const SearchReport& leg : r.per_run)
        top = std::max(top, leg.best_fitness);
    CHECK(r.best_fitness == top);

    // per-iteration view carries each leg's own best in its type column
    for (std::size_t it = 0; it <= cfg.max_iters; ++it)
        for (std::size_t l = 0; l < 3; ++l)
            CHECK(r.per_iteration[it].per_type_best[l] ==
                  r.per_run[l].per_iteration[it].best_fitness);
}

TEST_CASE("traditional search with one type and no iterations returns the init best") {
    auto [train_set, test_set] = toy_split();
    const ParamRanges ranges;
    SwarmConfig cfg = small_cfg(61);
    cfg.max_iters = 0;
    const SearchReport r =
        traditional_search(train_set, test_set, {2}, ranges, cfg, fast_solver());
    CHECK(r.fitness_evaluations == cfg.particles);
    CHECK(r.best_type == 2);
    CHECK(r.per_run.size() == 1);
    REQUIRE(r.per_run[0].per_iteration.size() == 1);
    CHECK(r.best_fitness == r.per_run[0].per_iteration[0].best_fitness);
}

TEST_CASE("traditional search is deterministic per seed") {
    auto [train_set, test_set] = toy_split();
    const ParamRanges ranges;
    SwarmConfig cfg = small_cfg(71);
    cfg.particles = 6;
    cfg.max_iters = 2;
    const SearchReport a =
        traditional_search(train_set, test_set, {1, 2, 3}, ranges, cfg, fast_solver());
    const SearchReport b =
        traditional_search(train_set, test_set, {1, 2, 3}, ranges, cfg, fast_solver());
    CHECK(reports_equal(a, b));
    for (std::size_t l = 0; l < 3; ++l)
        CHECK(reports_equal(a.per_run[l], b.per_run[l]));
}

TEST_CASE("empty kernel-type list is rejected") {
    auto [train_set, test_set] = toy_split();
    CHECK_THROWS_AS(traditional_search(train_set, test_set, {}, ParamRanges{}, small_cfg(1),
                                       fast_solver()),
                    ConfigError);
}

TEST_CASE("fitness evaluator scores a known-good point at 100") {
    auto [train_set, test_set] = toy_split();
    const FitnessEvaluator eval(train_set, test_set, fast_solver(),
                                FitnessMode::combined_accuracy);
    // generous rbf on a cleanly separable set: expect a perfect score
    const double fit = eval.fitness(2, {1.0, 0.0, 10.0});
    CHECK(fit == 100.0);
}

TEST_CASE("fitness evaluator matches the plain evaluate path bit for bit") {
    auto [train_set, test_set] = toy_split();
    const FitnessEvaluator eval(train_set, test_set, fast_solver(),
                                FitnessMode::combined_accuracy);
    for (const Position pos : {Position{0.5, 0.0, 2.0}, Position{4.01, 0.0, 9.83}}) {
        const SvmModel m = eval.train_at(2, pos);
        const EvalReport fast = eval.evaluate_model(m);
        const EvalReport direct = evaluate(m, train_set, test_set);
        CHECK(fast.train_errors == direct.train_errors);
        CHECK(fast.test_errors == direct.test_errors);
        CHECK(fast.combined_accuracy == direct.combined_accuracy);
        CHECK(fast.train_accuracy == direct.train_accuracy);
        CHECK(fast.support_count == direct.support_count);
    }
}
