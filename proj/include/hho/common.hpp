#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace hho {

using point         = Eigen::Vector2d;
using vector2       = Eigen::Vector2d;
using dense_matrix  = Eigen::MatrixXd;
using dense_vector  = Eigen::VectorXd;
using sparse_matrix = Eigen::SparseMatrix<double>;
using triplet       = Eigen::Triplet<double>;

inline constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

/// Highest polynomial degree the discretization supports.
inline constexpr int max_degree = 3;

class error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class invalid_mesh : public error
{
public:
    using error::error;
};

class unsupported_dimension : public error
{
public:
    using error::error;
};

class unsupported_degree : public error
{
public:
    using error::error;
};

/// Raised when the classical (L2-load) method is asked to discretize a load
/// that has a divergence part, i.e. a load that is not a function.
class method_inapplicable : public error
{
public:
    using error::error;
};

class internal_error : public error
{
public:
    using error::error;
};

/// Number of polynomials of total degree <= q in d variables (0 for q < 0).
constexpr std::size_t
poly_dim(int q, int d = 2)
{
    if (q < 0)
        return 0;
    std::size_t num = 1, den = 1;
    for (int i = 1; i <= d; i++) {
        num *= static_cast<std::size_t>(q + i);
        den *= static_cast<std::size_t>(i);
    }
    return num / den;
}

namespace detail {
inline std::atomic<unsigned>&
thread_count()
{
    static std::atomic<unsigned> count{1};
    return count;
}
} // namespace detail

/// Caps the number of workers used by per-cell loops. 0 means hardware concurrency.
inline void
set_num_threads(unsigned n)
{
    if (n == 0)
        n = std::max(1u, std::thread::hardware_concurrency());
    detail::thread_count() = n;
}

inline unsigned
num_threads()
{
    return detail::thread_count();
}

/// Runs fn(i) for i in [0, n). Callers write to disjoint per-index slots only,
/// so results do not depend on the number of workers.
template<typename Fn>
void
parallel_for(std::size_t n, Fn&& fn)
{
    const std::size_t workers = std::min<std::size_t>(num_threads(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; i++)
            fn(i);
        return;
    }

    std::vector<std::exception_ptr> failures(workers);
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        const std::size_t chunk = (n + workers - 1) / workers;
        for (std::size_t w = 0; w < workers; w++) {
            const std::size_t begin = w * chunk;
            const std::size_t end   = std::min(n, begin + chunk);
            if (begin >= end)
                break;
            pool.emplace_back([begin, end, w, &fn, &failures] {
                try {
                    for (std::size_t i = begin; i < end; i++)
                        fn(i);
                } catch (...) {
                    failures[w] = std::current_exception();
                }
            });
        }
    }
    for (auto& f : failures)
        if (f)
            std::rethrow_exception(f);
}

} // namespace hho
