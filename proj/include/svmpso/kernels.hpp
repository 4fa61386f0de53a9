#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>

#include "svmpso/common.hpp"

namespace svmpso {

/// Kernel family. The numeric values double as the kernel "type number"
/// used by the swarm (1 = polynomial, 2 = radial basis, 3 = sigmoid);
/// the linear kernel is available for classification but not searched.
enum class KernelKind : int {
    linear = 0,
    polynomial = 1,
    rbf = 2,
    sigmoid = 3,
};

inline const char* kernel_name(KernelKind k) {
    switch (k) {
    case KernelKind::linear: return "linear";
    case KernelKind::polynomial: return "polynomial";
    case KernelKind::rbf: return "rbf";
    case KernelKind::sigmoid: return "sigmoid";
    }
    return "?";
}

struct KernelSpec {
    KernelKind kind = KernelKind::linear;
    int degree = 3;       // polynomial
    double sigma = 1.0;   // rbf
    double k1 = 1.0;      // sigmoid, > 0
    double k2 = -1.0;     // sigmoid, < 0

    static KernelSpec linear() { return {KernelKind::linear}; }
    static KernelSpec polynomial(int d) {
        KernelSpec s{KernelKind::polynomial};
        s.degree = d;
        return s;
    }
    static KernelSpec rbf(double sigma) {
        KernelSpec s{KernelKind::rbf};
        s.sigma = sigma;
        return s;
    }
    static KernelSpec sigmoid(double k1, double k2) {
        KernelSpec s{KernelKind::sigmoid};
        s.k1 = k1;
        s.k2 = k2;
        return s;
    }

    void validate() const {
        switch (kind) {
        case KernelKind::linear:
            return;
        case KernelKind::polynomial:
            if (degree < 1)
                throw ConfigError("polynomial kernel needs degree >= 1");
            return;
        case KernelKind::rbf:
            if (!(sigma > 0.0))
                throw ConfigError("rbf kernel needs sigma > 0");
            return;
        case KernelKind::sigmoid:
            if (!(k1 > 0.0) || !(k2 < 0.0))
                throw ConfigError("sigmoid kernel needs k1 > 0 and k2 < 0");
            return;
        }
        throw ConfigError("unknown kernel kind");
    }

    std::string describe() const {
        switch (kind) {
        case KernelKind::linear: return "linear";
        case KernelKind::polynomial: return "polynomial(d=" + std::to_string(degree) + ")";
        case KernelKind::rbf: return "rbf(sigma=" + std::to_string(sigma) + ")";
        case KernelKind::sigmoid:
            return "sigmoid(k1=" + std::to_string(k1) + ", k2=" + std::to_string(k2) + ")";
        }
        return "?";
    }
};

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

inline double ipow(double base, int exp) {
    double r = 1.0;
    for (double f = base; exp > 0; exp >>= 1, f *= f)
        if (exp & 1)
            r *= f;
    return r;
}

/// Kernel value from the precomputed pair statistics. kernel_eval routes
/// through this too, so cached and direct evaluation are bit-identical.
inline double kernel_from_stats(const KernelSpec& spec, double dot, double sqdist) {
    switch (spec.kind) {
    case KernelKind::linear:
        return dot;
    case KernelKind::polynomial:
        return ipow(dot + 1.0, spec.degree);
    case KernelKind::rbf:
        return std::exp(-sqdist / (2.0 * spec.sigma * spec.sigma));
    case KernelKind::sigmoid:
        return std::tanh(spec.k2 + spec.k1 * dot);
    }
    return 0.0;
}

}  // namespace detail

/// kappa(a, b) for the four kernel families.
inline double kernel_eval(const KernelSpec& spec, std::span<const double> a,
                          std::span<const double> b) {
    if (a.size() != b.size())
        throw std::invalid_argument("kernel_eval: dimension mismatch");
    double dot = detail::dot(a, b);
    double sqd = spec.kind == KernelKind::rbf ? detail::squared_distance(a, b) : 0.0;
    return detail::kernel_from_stats(spec, dot, sqd);
}

/// Pairwise dot products and squared distances between the rows of two
/// feature matrices, computed once per dataset pair. Kernel parameters are
/// applied afterwards as scalar transforms, which is what makes re-training
/// hundreds of swarm particles affordable. Read-only after construction,
/// safe for concurrent readers.
class KernelBasis {
public:
    KernelBasis() = default;

    KernelBasis(const Matrix& rows, const Matrix& cols)
        : dots_(rows.rows(), cols.rows()), sqdists_(rows.rows(), cols.rows()) {
        if (rows.cols() != cols.cols())
            throw std::invalid_argument("KernelBasis: dimension mismatch");
        for (std::size_t i = 0; i < rows.rows(); ++i) {
            auto a = rows.row(i);
            for (std::size_t j = 0; j < cols.rows(); ++j) {
                auto b = cols.row(j);
                dots_(i, j) = detail::dot(a, b);
                sqdists_(i, j) = detail::squared_distance(a, b);
            }
        }
    }

    std::size_t rows() const { return dots_.rows(); }
    std::size_t cols() const { return dots_.cols(); }

    double eval(const KernelSpec& spec, std::size_t i, std::size_t j) const {
        return detail::kernel_from_stats(spec, dots_(i, j), sqdists_(i, j));
    }

    /// Materialize the full kernel matrix for one parameter setting.
    Matrix gram(const KernelSpec& spec) const {
        Matrix g(rows(), cols());
        for (std::size_t i = 0; i < rows(); ++i)
            for (std::size_t j = 0; j < cols(); ++j)
                g(i, j) = detail::kernel_from_stats(spec, dots_(i, j), sqdists_(i, j));
        return g;
    }

private:
    Matrix dots_, sqdists_;
};

}  // namespace svmpso
