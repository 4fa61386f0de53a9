#pragma once

#include <charconv>
#include <cstddef>
#include <exception>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <thread>
#include <utility>
#include <vector>

namespace svmpso {

// Error categories; the CLI maps them to exit codes (config=2, data=3, search=4).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SearchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Training set with fewer than two classes.
struct DegenerateProblemError : DataError {
    using DataError::DataError;
};

/// Dense row-major matrix. Just enough for feature storage and Gram tables.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), v_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return v_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return v_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return v_[r * cols_ + c]; }

    std::span<const double> row(std::size_t r) const { return {v_.data() + r * cols_, cols_}; }
    std::span<double> row(std::size_t r) { return {v_.data() + r * cols_, cols_}; }

    const std::vector<double>& data() const { return v_; }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> v_;
};

/// Shortest decimal string that parses back to the same double.
inline std::string format_double(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

inline std::optional<double> parse_double(std::string_view s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        return std::nullopt;
    return v;
}

/// Runs fn(i) for every i in [0, n) using up to `threads` worker threads
/// (0 = hardware concurrency, 1 = plain loop). Each index must write only
/// to its own output slot; because the work per index is identical either
/// way, serial and threaded execution produce bit-identical results.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    if (threads == 0)
        threads = std::thread::hardware_concurrency();
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    unsigned workers = threads < n ? threads : static_cast<unsigned>(n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += workers)
                    fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool)
        t.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

}  // namespace svmpso
