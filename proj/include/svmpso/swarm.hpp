#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "svmpso/common.hpp"
#include "svmpso/dataset.hpp"
#include "svmpso/kernels.hpp"
#include "svmpso/rng.hpp"
#include "svmpso/svm.hpp"

namespace svmpso {

// Kernel type numbers searched by the swarm: 1 = polynomial, 2 = radial
// basis, 3 = sigmoid. The linear kernel is not a search candidate.
inline constexpr std::array<int, 3> kSearchKernelTypes{1, 2, 3};

/// Search box for one kernel type: x1 is d, sigma or k2 depending on the
/// type, x2 is k1 for the sigmoid type and pinned to [0,0] otherwise.
struct TypeRange {
    double x1_min = 0, x1_max = 0;
    double x2_min = 0, x2_max = 0;
    double c_min = 0.1, c_max = 10.0;
};

struct ParamRanges {
    TypeRange polynomial{3.0, 8.0, 0.0, 0.0, 0.1, 10.0};
    TypeRange rbf{0.1, 10.0, 0.0, 0.0, 0.1, 10.0};
    TypeRange sigmoid{-10.0, -0.1, 0.1, 10.0, 0.1, 10.0};

    const TypeRange& for_type(int t) const {
        switch (t) {
        case 1: return polynomial;
        case 2: return rbf;
        case 3: return sigmoid;
        }
        throw ConfigError("kernel type number must be 1, 2 or 3");
    }

    void validate() const {
        for (int t : kSearchKernelTypes) {
            const TypeRange& r = for_type(t);
            if (r.x1_min > r.x1_max || r.x2_min > r.x2_max || r.c_min > r.c_max)
                throw ConfigError("parameter range with min > max for kernel type " +
                                  std::to_string(t));
            if (!(r.c_min > 0.0))
                throw ConfigError("C range must stay positive");
        }
        if (polynomial.x2_min != 0.0 || polynomial.x2_max != 0.0 || rbf.x2_min != 0.0 ||
            rbf.x2_max != 0.0)
            throw ConfigError("x2 range must be [0,0] for polynomial and rbf types");
        if (!(polynomial.x1_min >= 1.0))
            throw ConfigError("polynomial degree range must start at 1 or above");
        if (!(rbf.x1_min > 0.0))
            throw ConfigError("sigma range must stay positive");
        if (!(sigmoid.x1_max < 0.0))
            throw ConfigError("k2 range must stay negative");
        if (!(sigmoid.x2_min > 0.0))
            throw ConfigError("k1 range must stay positive");
    }
};

enum class FitnessMode { train_accuracy, combined_accuracy };

inline const char* fitness_mode_name(FitnessMode m) {
    return m == FitnessMode::train_accuracy ? "train" : "combined";
}

struct SwarmConfig {
    std::size_t particles = 600;   // m
    double k_scale = 0.3;          // K in (0,1)
    double phi_personal = 2.0;     // personal acceleration coefficient
    double phi_global = 5.0;       // global acceleration coefficient
    std::size_t max_iters = 20;    // N_max movement sweeps after initialization
    double regen_percent = 20.0;   // p, share of the swarm regenerated per iteration
    std::uint64_t seed = 1;
    FitnessMode fitness_mode = FitnessMode::train_accuracy;
    unsigned threads = 1;          // fitness evaluation workers; results identical either way
    bool capture_trace = true;

    void validate() const {
        if (particles == 0)
            throw ConfigError("particle count must be positive");
        if (!(regen_percent >= 0.0 && regen_percent <= 100.0))
            throw ConfigError("regeneration percent must lie in [0,100]");
        (void)0;
    }
};

struct Position {
    double x1 = 0.0, x2 = 0.0, c = 0.0;
};
struct Velocity {
    double v1 = 0.0, v2 = 0.0, v3 = 0.0;
};

struct Particle {
    int type = 2;  // T_i
    Position pos;
    Velocity vel;
    int best_type = 2;
    Position best_pos;
    double best_fitness = -std::numeric_limits<double>::infinity();
};

/// chi = 2K / |2 - phi - sqrt(phi^2 - 4 phi)| with phi = phi_personal + phi_global.
/// The canonical constriction update needs phi > 4.
inline double constriction(double k_scale, double phi_personal, double phi_global) {
    const double phi = phi_personal + phi_global;
    if (!(phi > 4.0))
        throw ConfigError("constriction requires phi_personal + phi_global > 4");
    if (!(k_scale > 0.0 && k_scale < 1.0))
        throw ConfigError("scaling coefficient K must lie in (0,1)");
    return 2.0 * k_scale / std::abs(2.0 - phi - std::sqrt(phi * phi - 4.0 * phi));
}

// Velocity updates draw two uniforms per coordinate, personal then global,
// in coordinate order x1, x2, C. UniformSource needs only open01(); tests
// substitute stubs to pin the random factors.

template <class UniformSource>
void velocity_update_classic(Particle& p, const Position& global_best, double phi_personal,
                             double phi_global, UniformSource& rng) {
    const double px[3] = {p.pos.x1, p.pos.x2, p.pos.c};
    const double bx[3] = {p.best_pos.x1, p.best_pos.x2, p.best_pos.c};
    const double gx[3] = {global_best.x1, global_best.x2, global_best.c};
    double* v[3] = {&p.vel.v1, &p.vel.v2, &p.vel.v3};
    for (int j = 0; j < 3; ++j) {
        const double rp = rng.open01(), rg = rng.open01();
        *v[j] += phi_personal * rp * (bx[j] - px[j]) + phi_global * rg * (gx[j] - px[j]);
    }
}

template <class UniformSource>
void velocity_update_canonical(Particle& p, const Position& attractor, double chi,
                               double phi_personal, double phi_global, UniformSource& rng) {
    const double px[3] = {p.pos.x1, p.pos.x2, p.pos.c};
    const double bx[3] = {p.best_pos.x1, p.best_pos.x2, p.best_pos.c};
    const double ax[3] = {attractor.x1, attractor.x2, attractor.c};
    double* v[3] = {&p.vel.v1, &p.vel.v2, &p.vel.v3};
    for (int j = 0; j < 3; ++j) {
        const double rp = rng.open01(), rg = rng.open01();
        *v[j] = chi * (*v[j] + phi_personal * rp * (bx[j] - px[j]) +
                       phi_global * rg * (ax[j] - px[j]));
    }
}

/// position += velocity, then clamp into the type's box; a clamped
/// coordinate gets its velocity component zeroed.
inline void position_update(Particle& p, const TypeRange& r) {
    auto step = [](double& x, double& v, double lo, double hi) {
        x += v;
        if (x < lo) {
            x = lo;
            v = 0.0;
        } else if (x > hi) {
            x = hi;
            v = 0.0;
        }
    };
    step(p.pos.x1, p.vel.v1, r.x1_min, r.x1_max);
    step(p.pos.x2, p.vel.v2, r.x2_min, r.x2_max);
    step(p.pos.c, p.vel.v3, r.c_min, r.c_max);
}

/// Particle coordinates -> kernel. The degree coordinate stays continuous
/// in the swarm and is rounded to the nearest integer here.
inline KernelSpec decode_kernel(int type, const Position& pos) {
    switch (type) {
    case 1: return KernelSpec::polynomial(static_cast<int>(std::lround(pos.x1)));
    case 2: return KernelSpec::rbf(pos.x1);
    case 3: return KernelSpec::sigmoid(/*k1=*/pos.x2, /*k2=*/pos.x1);
    }
    throw ConfigError("kernel type number must be 1, 2 or 3");
}

/// Trains and scores one hyperparameter point. Owns the precomputed
/// pairwise tables for the train/test pair, so each call costs one scalar
/// transform of the Gram table plus the SMO iterations. Immutable after
/// construction; evaluations are safe to run concurrently.
class FitnessEvaluator {
public:
    FitnessEvaluator(const Dataset& train_set, const Dataset& test_set, TrainConfig solver,
                     FitnessMode mode)
        : train_(train_set), test_(test_set), solver_(std::move(solver)), mode_(mode),
          train_basis_(train_set.features(), train_set.features()),
          cross_basis_(train_set.features(), test_set.features()) {
        if (!train_set.has_both_classes())
            throw DegenerateProblemError("training set must contain both classes");
        if (test_set.size() == 0)
            throw DataError("test set is empty");
    }

    SvmModel train_at(int type, const Position& pos) const {
        TrainConfig cfg = solver_;
        cfg.kernel = decode_kernel(type, pos);
        cfg.c = pos.c;
        return svmpso::train(train_, cfg, &train_basis_);
    }

    /// Error counts through the cached tables; bit-identical to evaluate().
    EvalReport evaluate_model(const SvmModel& model) const {
        EvalReport r;
        r.train_size = train_.size();
        r.test_size = test_.size();
        r.support_count = model.support_count();
        r.train_errors = count_errors_on(model, train_basis_, train_);
        r.test_errors = count_errors_on(model, cross_basis_, test_);
        const double s = static_cast<double>(r.train_size + r.test_size);
        r.combined_accuracy =
            (s - static_cast<double>(r.train_errors + r.test_errors)) / s * 100.0;
        r.train_accuracy =
            (static_cast<double>(r.train_size) - static_cast<double>(r.train_errors)) /
            static_cast<double>(r.train_size) * 100.0;
        return r;
    }

    /// Accuracy percentage at one swarm position, per the configured mode.
    double fitness(int type, const Position& pos) const {
        const SvmModel model = train_at(type, pos);
        const EvalReport r = evaluate_model(model);
        return mode_ == FitnessMode::combined_accuracy ? r.combined_accuracy : r.train_accuracy;
    }

    FitnessMode mode() const { return mode_; }
    const Dataset& train_set() const { return train_; }
    const Dataset& test_set() const { return test_; }

private:
    std::size_t count_errors_on(const SvmModel& model, const KernelBasis& basis,
                                const Dataset& target) const {
        std::size_t errors = 0;
        for (std::size_t j = 0; j < target.size(); ++j) {
            double f = model.bias;
            for (std::size_t i = 0; i < model.support_count(); ++i)
                f += model.alphas[i] * model.support_labels[i] *
                     basis.eval(model.kernel, model.support_indices[i], j);
            const int label = f >= 0.0 ? +1 : -1;
            if (label != target.label(j))
                ++errors;
        }
        return errors;
    }

    const Dataset& train_;
    const Dataset& test_;
    TrainConfig solver_;
    FitnessMode mode_;
    KernelBasis train_basis_;
    KernelBasis cross_basis_;
};

struct IterationStat {
    std::size_t iteration = 0;
    int best_type = 0;
    Position best_pos;
    double best_fitness = 0.0;
    std::array<double, 3> per_type_best{};  // indexed by type-1; NaN when the type is absent
    std::size_t regenerated = 0;
};

struct TraceRecord {
    int run = 0;  // traditional: kernel type of the leg; modified: 0
    std::size_t iteration = 0;
    std::size_t particle = 0;
    int type = 0;
    double x1 = 0, x2 = 0, c = 0;
    double fitness = 0;
    bool regenerated = false;
};

struct SearchReport {
    std::string mode;
    int best_type = 0;
    Position best_pos;
    double best_fitness = 0.0;
    SvmModel best_model;
    EvalReport best_eval;
    std::vector<IterationStat> per_iteration;
    std::vector<TraceRecord> trace;
    std::size_t fitness_evaluations = 0;
    double elapsed_seconds = 0.0;  // reported, never asserted
    std::vector<SearchReport> per_run;  // traditional mode: one entry per kernel type
};

namespace detail {

inline void init_particle(Particle& p, int type, const ParamRanges& ranges, Rng& rng) {
    const TypeRange& r = ranges.for_type(type);
    p.type = type;
    p.pos.x1 = rng.uniform(r.x1_min, r.x1_max);
    p.pos.x2 = rng.uniform(r.x2_min, r.x2_max);
    p.pos.c = rng.uniform(r.c_min, r.c_max);
    const double w1 = r.x1_max - r.x1_min, w2 = r.x2_max - r.x2_min, w3 = r.c_max - r.c_min;
    p.vel.v1 = rng.uniform(-0.5 * w1, 0.5 * w1);
    p.vel.v2 = rng.uniform(-0.5 * w2, 0.5 * w2);
    p.vel.v3 = rng.uniform(-0.5 * w3, 0.5 * w3);
    p.best_type = type;
    p.best_pos = p.pos;
    p.best_fitness = -std::numeric_limits<double>::infinity();
}

/// Index of the best personal best; ties go to the lowest particle index.
inline std::size_t global_best_index(const std::vector<Particle>& swarm) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < swarm.size(); ++i)
        if (swarm[i].best_fitness > swarm[best].best_fitness)
            best = i;
    return best;
}

/// Best personal best among particles of one type, skipping entries whose
/// fitness is still stale from regeneration.
inline std::optional<std::size_t> type_best_index(const std::vector<Particle>& swarm, int type) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < swarm.size(); ++i) {
        const Particle& p = swarm[i];
        if (p.type != type || std::isinf(p.best_fitness))
            continue;
        if (!best || p.best_fitness > swarm[*best].best_fitness)
            best = i;
    }
    return best;
}

inline IterationStat snapshot_stats(const std::vector<Particle>& swarm, std::size_t iteration,
                                    std::size_t regenerated) {
    IterationStat st;
    st.iteration = iteration;
    st.regenerated = regenerated;
    const std::size_t g = global_best_index(swarm);
    st.best_type = swarm[g].best_type;
    st.best_pos = swarm[g].best_pos;
    st.best_fitness = swarm[g].best_fitness;
    for (int t : kSearchKernelTypes) {
        auto idx = type_best_index(swarm, t);
        st.per_type_best[t - 1] =
            idx ? swarm[*idx].best_fitness : std::numeric_limits<double>::quiet_NaN();
    }
    return st;
}

inline void append_trace(std::vector<TraceRecord>& trace, const std::vector<Particle>& swarm,
                         const std::vector<double>& fitness, int run, std::size_t iteration,
                         const std::vector<std::size_t>& regenerated) {
    std::size_t r = 0;
    for (std::size_t i = 0; i < swarm.size(); ++i) {
        while (r < regenerated.size() && regenerated[r] < i)
            ++r;
        trace.push_back({run, iteration, i, swarm[i].type, swarm[i].pos.x1, swarm[i].pos.x2,
                         swarm[i].pos.c, fitness[i],
                         r < regenerated.size() && regenerated[r] == i});
    }
}

}  // namespace detail

/// Converts the worst-scoring share of particles whose kernel type differs
/// from the globally best type: they adopt that type with freshly sampled
/// position and velocity, and their personal best restarts from the new
/// position (stale until the next evaluation). Returns the regenerated
/// indices in ascending order; count = min(floor(p/100 * m), eligible).
inline std::vector<std::size_t> regenerate(std::vector<Particle>& swarm, int global_best_type,
                                           double percent, const ParamRanges& ranges, Rng& rng) {
    const std::size_t quota =
        static_cast<std::size_t>(std::floor(percent * static_cast<double>(swarm.size()) / 100.0));
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < swarm.size(); ++i)
        if (swarm[i].type != global_best_type)
            eligible.push_back(i);
    const std::size_t n = std::min(quota, eligible.size());
    if (n == 0)
        return {};
    std::partial_sort(eligible.begin(), eligible.begin() + n, eligible.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (swarm[a].best_fitness != swarm[b].best_fitness)
                              return swarm[a].best_fitness < swarm[b].best_fitness;
                          return a < b;
                      });
    eligible.resize(n);
    std::sort(eligible.begin(), eligible.end());
    for (std::size_t i : eligible)
        detail::init_particle(swarm[i], global_best_type, ranges, rng);
    return eligible;
}

/// The simultaneous search over kernel type, kernel parameters and C.
/// Initialization spreads the swarm evenly over the kernel types; every
/// iteration regenerates stragglers toward the leading type, then moves
/// each particle with the constriction update pulled by its personal best
/// and the best particle of its own kernel type.
inline SearchReport modified_search(const Dataset& train_set, const Dataset& test_set,
                                    const ParamRanges& ranges, const SwarmConfig& cfg,
                                    const TrainConfig& solver) {
    cfg.validate();
    ranges.validate();
    const double chi = constriction(cfg.k_scale, cfg.phi_personal, cfg.phi_global);
    const auto t0 = std::chrono::steady_clock::now();

    FitnessEvaluator eval(train_set, test_set, solver, cfg.fitness_mode);
    Rng rng(cfg.seed);
    const std::size_t m = cfg.particles;

    std::vector<Particle> swarm(m);
    for (std::size_t i = 0; i < m; ++i)
        detail::init_particle(swarm[i], kSearchKernelTypes[i % kSearchKernelTypes.size()],
                              ranges, rng);

    SearchReport report;
    report.mode = "modified";
    std::vector<double> fitness(m);
    auto evaluate_all = [&] {
        parallel_for(m, cfg.threads, [&](std::size_t i) {
            fitness[i] = eval.fitness(swarm[i].type, swarm[i].pos);
        });
        report.fitness_evaluations += m;
    };
    auto refresh_personal = [&] {
        for (std::size_t i = 0; i < m; ++i) {
            if (fitness[i] > swarm[i].best_fitness) {
                swarm[i].best_fitness = fitness[i];
                swarm[i].best_pos = swarm[i].pos;
                swarm[i].best_type = swarm[i].type;
            }
        }
    };

    evaluate_all();
    refresh_personal();
    report.per_iteration.push_back(detail::snapshot_stats(swarm, 0, 0));
    if (cfg.capture_trace)
        detail::append_trace(report.trace, swarm, fitness, 0, 0, {});

    for (std::size_t iter = 1; iter <= cfg.max_iters; ++iter) {
        const std::size_t g = detail::global_best_index(swarm);
        const auto regenerated =
            regenerate(swarm, swarm[g].best_type, cfg.regen_percent, ranges, rng);

        std::array<std::optional<Position>, 3> attractor;
        for (int t : kSearchKernelTypes) {
            auto idx = detail::type_best_index(swarm, t);
            if (idx) {
                attractor[t - 1] = swarm[*idx].best_pos;
            } else {
                // occupied type with only stale bests: fall back to the first
                // member's position (regeneration makes this unreachable)
                for (const Particle& p : swarm)
                    if (p.type == t) {
                        attractor[t - 1] = p.pos;
                        break;
                    }
            }
        }

        for (std::size_t i = 0; i < m; ++i) {
            Particle& p = swarm[i];
            velocity_update_canonical(p, *attractor[p.type - 1], chi, cfg.phi_personal,
                                      cfg.phi_global, rng);
            position_update(p, ranges.for_type(p.type));
        }

        evaluate_all();
        refresh_personal();
        report.per_iteration.push_back(detail::snapshot_stats(swarm, iter, regenerated.size()));
        if (cfg.capture_trace)
            detail::append_trace(report.trace, swarm, fitness, 0, iter, regenerated);
    }

    const std::size_t g = detail::global_best_index(swarm);
    report.best_type = swarm[g].best_type;
    report.best_pos = swarm[g].best_pos;
    report.best_fitness = swarm[g].best_fitness;
    report.best_model = eval.train_at(report.best_type, report.best_pos);
    report.best_eval = eval.evaluate_model(report.best_model);
    report.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

namespace detail {

/// One canonical-PSO run with the kernel type held fixed: the constriction
/// velocity update pulled by the run's own global best.
inline SearchReport fixed_type_search(int type, const FitnessEvaluator& eval,
                                      const ParamRanges& ranges, const SwarmConfig& cfg,
                                      std::uint64_t seed) {
    const double chi = constriction(cfg.k_scale, cfg.phi_personal, cfg.phi_global);
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(seed);
    const std::size_t m = cfg.particles;

    std::vector<Particle> swarm(m);
    for (std::size_t i = 0; i < m; ++i)
        init_particle(swarm[i], type, ranges, rng);

    SearchReport report;
    report.mode = "traditional";
    std::vector<double> fitness(m);
    auto evaluate_all = [&] {
        parallel_for(m, cfg.threads, [&](std::size_t i) {
            fitness[i] = eval.fitness(swarm[i].type, swarm[i].pos);
        });
        report.fitness_evaluations += m;
    };
    auto refresh_personal = [&] {
        for (std::size_t i = 0; i < m; ++i) {
            if (fitness[i] > swarm[i].best_fitness) {
                swarm[i].best_fitness = fitness[i];
                swarm[i].best_pos = swarm[i].pos;
                swarm[i].best_type = swarm[i].type;
            }
        }
    };

    evaluate_all();
    refresh_personal();
    report.per_iteration.push_back(snapshot_stats(swarm, 0, 0));
    if (cfg.capture_trace)
        append_trace(report.trace, swarm, fitness, type, 0, {});

    for (std::size_t iter = 1; iter <= cfg.max_iters; ++iter) {
        const Position global_best = swarm[global_best_index(swarm)].best_pos;
        for (std::size_t i = 0; i < m; ++i) {
            velocity_update_canonical(swarm[i], global_best, chi, cfg.phi_personal,
                                      cfg.phi_global, rng);
            position_update(swarm[i], ranges.for_type(type));
        }
        evaluate_all();
        refresh_personal();
        report.per_iteration.push_back(snapshot_stats(swarm, iter, 0));
        if (cfg.capture_trace)
            append_trace(report.trace, swarm, fitness, type, iter, {});
    }

    const std::size_t g = global_best_index(swarm);
    report.best_type = type;
    report.best_pos = swarm[g].best_pos;
    report.best_fitness = swarm[g].best_fitness;
    report.best_model = eval.train_at(type, report.best_pos);
    report.best_eval = eval.evaluate_model(report.best_model);
    report.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

}  // namespace detail

/// The repeated fixed-kernel approach: one independent canonical-PSO run
/// per kernel type, then the best particle across runs. Costs |types| times
/// the fitness evaluations of one modified run with the same m and N_max.
inline SearchReport traditional_search(const Dataset& train_set, const Dataset& test_set,
                                       const std::vector<int>& kernel_types,
                                       const ParamRanges& ranges, const SwarmConfig& cfg,
                                       const TrainConfig& solver) {
    cfg.validate();
    ranges.validate();
    if (kernel_types.empty())
        throw ConfigError("traditional search needs at least one kernel type");
    const auto t0 = std::chrono::steady_clock::now();

    FitnessEvaluator eval(train_set, test_set, solver, cfg.fitness_mode);

    SearchReport report;
    report.mode = "traditional";
    for (int type : kernel_types) {
        const std::uint64_t leg_seed = mix_seed(cfg.seed ^ (0x9e3779b97f4a7c15ULL * type));
        report.per_run.push_back(detail::fixed_type_search(type, eval, ranges, cfg, leg_seed));
    }

    const SearchReport* winner = &report.per_run.front();
    for (const SearchReport& leg : report.per_run) {
        report.fitness_evaluations += leg.fitness_evaluations;
        report.trace.insert(report.trace.end(), leg.trace.begin(), leg.trace.end());
        if (leg.best_fitness > winner->best_fitness)
            winner = &leg;
    }
    report.best_type = winner->best_type;
    report.best_pos = winner->best_pos;
    report.best_fitness = winner->best_fitness;
    report.best_model = winner->best_model;
    report.best_eval = winner->best_eval;

    // combined per-iteration view: global best across legs, per-type column
    // holding each leg's own best
    for (std::size_t it = 0; it <= cfg.max_iters; ++it) {
        IterationStat st;
        st.iteration = it;
        st.per_type_best.fill(std::numeric_limits<double>::quiet_NaN());
        const IterationStat* best_leg = nullptr;
        for (std::size_t l = 0; l < report.per_run.size(); ++l) {
            const IterationStat& leg_stat = report.per_run[l].per_iteration[it];
            const int t = kernel_types[l];
            if (t >= 1 && t <= 3)
                st.per_type_best[t - 1] = leg_stat.best_fitness;
            if (!best_leg || leg_stat.best_fitness > best_leg->best_fitness)
                best_leg = &leg_stat;
        }
        st.best_type = best_leg->best_type;
        st.best_pos = best_leg->best_pos;
        st.best_fitness = best_leg->best_fitness;
        report.per_iteration.push_back(st);
    }

    report.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

}  // namespace svmpso
