#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "svmpso/common.hpp"
#include "svmpso/dataset.hpp"
#include "svmpso/kernels.hpp"

namespace svmpso {

struct TrainConfig {
    KernelSpec kernel;
    double c = 1.0;              // box constraint, 0 <= lambda_i <= c
    double tolerance = 1e-3;     // KKT tolerance
    int max_passes = 10;         // consecutive zero-progress sweeps tolerated
    double sv_threshold = 1e-8;  // lambda above this counts as a support vector

    void validate() const {
        kernel.validate();
        if (!(c > 0.0))
            throw ConfigError("regularization parameter C must be positive");
        if (!(tolerance > 0.0))
            throw ConfigError("KKT tolerance must be positive");
        if (max_passes < 1)
            throw ConfigError("max_passes must be >= 1");
    }
};

struct SvmDiagnostics {
    bool converged = true;
    int sweeps = 0;             // outer SMO sweeps executed
    double dual_objective = 0;  // L(lambda) at termination
    double sum_alpha_y = 0;     // equality-constraint residual
};

/// Trained classifier: only the support vectors are stored, they carry all
/// the information about the class separation.
struct SvmModel {
    KernelSpec kernel;
    double c = 1.0;
    std::vector<std::size_t> support_indices;  // into the training set
    std::vector<double> alphas;                // dual coefficients, one per support vector
    std::vector<int> support_labels;
    Matrix support_vectors;                    // one row per support vector
    double bias = 0.0;
    SvmDiagnostics diag;

    std::size_t dim() const { return support_vectors.cols(); }
    std::size_t support_count() const { return alphas.size(); }
};

struct EvalReport {
    std::size_t train_errors = 0;
    std::size_t test_errors = 0;
    std::size_t train_size = 0;
    std::size_t test_size = 0;
    std::size_t support_count = 0;
    double combined_accuracy = 0.0;  // (S - train_errors - test_errors) / S * 100
    double train_accuracy = 0.0;
};

namespace detail {

struct SmoOutcome {
    std::vector<double> alpha;
    double bias = 0.0;  // working threshold maintained by the solver
    bool converged = false;
    int sweeps = 0;
};

/// Platt-style sequential minimal optimization over the dual problem:
///   maximize  sum(a) - 1/2 sum_ij a_i a_j y_i y_j K(i,j)
///   s.t.      sum(a_i y_i) = 0,  0 <= a_i <= C.
/// KernelAt is any callable double(size_t, size_t). Deterministic: the
/// second-choice heuristic maximizes |E_i - E_j| and the fallback scans
/// start right after the first index instead of Platt's random offset.
template <class KernelAt>
SmoOutcome smo_solve(std::span<const int> y, KernelAt K, double C, double tol, int max_passes) {
    const std::size_t n = y.size();
    const double snap = 1e-12 * std::max(1.0, C);
    constexpr int kHardSweepCap = 1000;

    std::vector<double> alpha(n, 0.0);
    std::vector<double> err(n);  // E_i = f(i) - y_i, exact while alpha/bias change
    for (std::size_t i = 0; i < n; ++i)
        err[i] = -static_cast<double>(y[i]);
    double b = 0.0;

    auto take_step = [&](std::size_t i1, std::size_t i2) -> bool {
        if (i1 == i2)
            return false;
        const double a1 = alpha[i1], a2 = alpha[i2];
        const int y1 = y[i1], y2 = y[i2];
        const double e1 = err[i1], e2 = err[i2];
        const double s = y1 * y2;

        double lo, hi;
        if (s > 0) {
            lo = std::max(0.0, a1 + a2 - C);
            hi = std::min(C, a1 + a2);
        } else {
            lo = std::max(0.0, a2 - a1);
            hi = std::min(C, C + a2 - a1);
        }
        if (lo >= hi)
            return false;

        const double k11 = K(i1, i1), k12 = K(i1, i2), k22 = K(i2, i2);
        const double eta = k11 + k22 - 2.0 * k12;

        double a2new;
        if (eta > 0.0) {
            a2new = a2 + y2 * (e1 - e2) / eta;
            a2new = std::clamp(a2new, lo, hi);
        } else {
            // Non-positive curvature (duplicates or a non-PSD sigmoid kernel):
            // evaluate the dual objective at both ends of the segment.
            // Contributions of the pair, with the rest held fixed:
            //   W(t) = a1(t) + t - 1/2 a1(t)^2 k11 - 1/2 t^2 k22 - s a1(t) t k12
            //          - y1 a1(t) v1 - y2 t v2
            // where a1(t) = a1 + s (a2 - t), v_i = f(i) - b - y1 a1 K(i1,i) - y2 a2 K(i2,i).
            const double g1 = e1 + y1;  // f(i1) with current bias folded out below
            const double g2 = e2 + y2;
            const double v1 = (g1 - b) - y1 * a1 * k11 - y2 * a2 * k12;
            const double v2 = (g2 - b) - y1 * a1 * k12 - y2 * a2 * k22;
            auto objective = [&](double t) {
                double a1t = a1 + s * (a2 - t);
                return a1t + t - 0.5 * a1t * a1t * k11 - 0.5 * t * t * k22 -
                       s * a1t * t * k12 - y1 * a1t * v1 - y2 * t * v2;
            };
            const double wl = objective(lo), wh = objective(hi);
            if (wl > wh + 1e-12)
                a2new = lo;
            else if (wh > wl + 1e-12)
                a2new = hi;
            else
                return false;
        }
        if (std::abs(a2new - a2) < snap)
            return false;

        double a1new = a1 + s * (a2 - a2new);
        // snap round-off residue onto the exact bounds
        if (a1new < snap)
            a1new = 0.0;
        else if (a1new > C - snap)
            a1new = C;
        if (a2new < snap)
            a2new = 0.0;
        else if (a2new > C - snap)
            a2new = C;

        const double d1 = y1 * (a1new - a1), d2 = y2 * (a2new - a2);
        const double b1 = b - e1 - d1 * k11 - d2 * k12;
        const double b2 = b - e2 - d1 * k12 - d2 * k22;
        double bnew;
        if (a1new > 0.0 && a1new < C)
            bnew = b1;
        else if (a2new > 0.0 && a2new < C)
            bnew = b2;
        else
            bnew = 0.5 * (b1 + b2);

        const double db = bnew - b;
        for (std::size_t k = 0; k < n; ++k)
            err[k] += d1 * K(i1, k) + d2 * K(i2, k) + db;

        alpha[i1] = a1new;
        alpha[i2] = a2new;
        b = bnew;
        return true;
    };

    auto examine = [&](std::size_t i2) -> bool {
        const int y2 = y[i2];
        const double a2 = alpha[i2];
        const double r2 = err[i2] * y2;
        if (!((r2 < -tol && a2 < C) || (r2 > tol && a2 > 0.0)))
            return false;

        // second-choice heuristic: maximize |E1 - E2| over non-bound points
        std::size_t best = n;
        double best_gap = -1.0;
        for (std::size_t k = 0; k < n; ++k) {
            if (k == i2 || alpha[k] <= 0.0 || alpha[k] >= C)
                continue;
            double gap = std::abs(err[k] - err[i2]);
            if (gap > best_gap) {
                best_gap = gap;
                best = k;
            }
        }
        if (best < n && take_step(best, i2))
            return true;
        for (std::size_t off = 1; off < n; ++off) {  // non-bound fallback
            std::size_t k = (i2 + off) % n;
            if (alpha[k] > 0.0 && alpha[k] < C && take_step(k, i2))
                return true;
        }
        for (std::size_t off = 1; off < n; ++off) {  // full fallback
            std::size_t k = (i2 + off) % n;
            if (take_step(k, i2))
                return true;
        }
        return false;
    };

    SmoOutcome out;
    bool examine_all = true;
    int idle_sweeps = 0;
    while (out.sweeps < kHardSweepCap) {
        ++out.sweeps;
        std::size_t changed = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!examine_all && (alpha[i] <= 0.0 || alpha[i] >= C))
                continue;
            changed += examine(i) ? 1 : 0;
        }
        if (changed == 0) {
            if (examine_all) {
                out.converged = true;  // every point satisfies KKT within tol
                break;
            }
            if (++idle_sweeps >= max_passes)
                break;
            examine_all = true;
        } else {
            idle_sweeps = 0;
            examine_all = false;
        }
    }
    out.alpha = std::move(alpha);
    out.bias = b;
    return out;
}

}  // namespace detail

/// Trains on a dual formulation with an SMO working set of two. The Gram
/// matrix comes from `basis` when provided (rows and cols must both index
/// train_set), otherwise it is built from the kernel directly; both paths
/// produce bit-identical models. Non-convergence inside the sweep budget
/// returns a model flagged in diag.converged rather than an error, since
/// swarm fitness evaluation has to survive bad hyperparameter regions.
inline SvmModel train(const Dataset& train_set, const TrainConfig& cfg,
                      const KernelBasis* basis = nullptr) {
    cfg.validate();
    if (train_set.size() < 2 || !train_set.has_both_classes())
        throw DegenerateProblemError("training set must contain both classes");
    if (basis && (basis->rows() != train_set.size() || basis->cols() != train_set.size()))
        throw std::invalid_argument("train: basis shape does not match training set");

    const std::size_t n = train_set.size();
    Matrix gram = basis ? basis->gram(cfg.kernel) : KernelBasis(train_set.features(),
                                                                train_set.features())
                                                        .gram(cfg.kernel);
    auto K = [&gram](std::size_t i, std::size_t j) { return gram(i, j); };
    auto outcome = detail::smo_solve(std::span<const int>(train_set.labels()), K, cfg.c,
                                     cfg.tolerance, cfg.max_passes);

    // Final bias per the averaging rule: mean over unbounded support vectors;
    // with none, the midpoint of the feasibility interval from bounded points.
    std::vector<double> g(n, 0.0);  // decision values without bias
    for (std::size_t j = 0; j < n; ++j) {
        if (outcome.alpha[j] <= 0.0)
            continue;
        const double w = outcome.alpha[j] * train_set.label(j);
        for (std::size_t i = 0; i < n; ++i)
            g[i] += w * gram(j, i);
    }
    double bias_sum = 0.0;
    std::size_t unbounded = 0;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double a = outcome.alpha[i];
        const double bi = train_set.label(i) - g[i];
        if (a > 0.0 && a < cfg.c) {
            bias_sum += bi;
            ++unbounded;
        } else if ((a <= 0.0 && train_set.label(i) > 0) || (a >= cfg.c && train_set.label(i) < 0)) {
            lo = std::max(lo, bi);  // b >= y_i - g_i
        } else {
            hi = std::min(hi, bi);  // b <= y_i - g_i
        }
    }
    double bias;
    if (unbounded > 0)
        bias = bias_sum / static_cast<double>(unbounded);
    else if (std::isfinite(lo) && std::isfinite(hi))
        bias = 0.5 * (lo + hi);
    else
        bias = outcome.bias;

    SvmModel model;
    model.kernel = cfg.kernel;
    model.c = cfg.c;
    model.bias = bias;
    model.diag.converged = outcome.converged;
    model.diag.sweeps = outcome.sweeps;

    double obj = 0.0, say = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        obj += outcome.alpha[i] - 0.5 * outcome.alpha[i] * train_set.label(i) * g[i];
        say += outcome.alpha[i] * train_set.label(i);
    }
    model.diag.dual_objective = obj;
    model.diag.sum_alpha_y = say;

    std::vector<std::size_t> sv;
    for (std::size_t i = 0; i < n; ++i)
        if (outcome.alpha[i] > cfg.sv_threshold)
            sv.push_back(i);
    model.support_indices = sv;
    model.alphas.reserve(sv.size());
    model.support_labels.reserve(sv.size());
    model.support_vectors = Matrix(sv.size(), train_set.dim());
    for (std::size_t r = 0; r < sv.size(); ++r) {
        model.alphas.push_back(outcome.alpha[sv[r]]);
        model.support_labels.push_back(train_set.label(sv[r]));
        auto src = train_set.features_of(sv[r]);
        std::copy(src.begin(), src.end(), model.support_vectors.row(r).begin());
    }
    return model;
}

/// Signed functional margin sum_i lambda_i y_i kappa(z_i, z) + b.
inline double decision_value(const SvmModel& model, std::span<const double> z) {
    if (z.size() != model.dim())
        throw std::invalid_argument("decision_value: dimension mismatch");
    double f = model.bias;
    for (std::size_t i = 0; i < model.support_count(); ++i)
        f += model.alphas[i] * model.support_labels[i] *
             kernel_eval(model.kernel, model.support_vectors.row(i), z);
    return f;
}

/// Class label from the margin sign; an exact zero maps to +1.
inline int predict(const SvmModel& model, std::span<const double> z) {
    return decision_value(model, z) >= 0.0 ? +1 : -1;
}

inline std::size_t count_errors(const SvmModel& model, const Dataset& ds) {
    std::size_t errors = 0;
    for (std::size_t i = 0; i < ds.size(); ++i)
        if (predict(model, ds.features_of(i)) != ds.label(i))
            ++errors;
    return errors;
}

/// Error counts on both partitions plus the combined accuracy over all
/// S = |train| + |test| objects, matching the accuracy figures reported
/// alongside error columns.
inline EvalReport evaluate(const SvmModel& model, const Dataset& train_set,
                           const Dataset& test_set) {
    EvalReport r;
    r.train_size = train_set.size();
    r.test_size = test_set.size();
    r.train_errors = count_errors(model, train_set);
    r.test_errors = count_errors(model, test_set);
    r.support_count = model.support_count();
    const double s = static_cast<double>(r.train_size + r.test_size);
    r.combined_accuracy =
        (s - static_cast<double>(r.train_errors + r.test_errors)) / s * 100.0;
    r.train_accuracy = (static_cast<double>(r.train_size) - static_cast<double>(r.train_errors)) /
                       static_cast<double>(r.train_size) * 100.0;
    return r;
}

}  // namespace svmpso
