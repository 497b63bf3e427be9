#pragma once

#include <Eigen/SparseCholesky>

#include <cmath>
#include <random>
#include <vector>

#include "hho/common.hpp"

namespace hho {

/**
 * Largest eigenvalue of the pencil (G, B), G symmetric positive semidefinite
 * and B symmetric positive definite, by Lanczos iterations on B^{-1} G in the
 * B inner product with full reorthogonalization.
 */
inline double
lanczos_max_eigenvalue(const sparse_matrix& G, const sparse_matrix& B, int max_steps = 300, double tol = 1e-10,
                       unsigned seed = 1)
{
    const Eigen::Index n = B.rows();
    if (n == 0)
        return 0.0;

    Eigen::SimplicialLDLT<sparse_matrix> fact(B);
    if (fact.info() != Eigen::Success)
        throw internal_error("Lanczos: factorization of the inner-product matrix failed");

    std::mt19937_64                        gen(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    dense_vector                           v(n);
    for (Eigen::Index i = 0; i < n; i++)
        v(i) = dist(gen);
    v /= std::sqrt(v.dot(B * v));

    const int                 m = int(std::min<Eigen::Index>(max_steps, n));
    std::vector<dense_vector> V, BV;
    std::vector<double>       alpha, beta;
    double                    prev = 0.0;

    for (int k = 0; k < m; k++) {
        V.push_back(v);
        BV.push_back(B * v);
        dense_vector w = fact.solve(G * v);
        const double a = w.dot(BV.back());
        alpha.push_back(a);
        for (int pass = 0; pass < 2; pass++)
            for (std::size_t j = 0; j < V.size(); j++)
                w -= w.dot(BV[j]) * V[j];

        const Eigen::Index kk = Eigen::Index(alpha.size());
        dense_matrix       T  = dense_matrix::Zero(kk, kk);
        for (Eigen::Index i = 0; i < kk; i++) {
            T(i, i) = alpha[i];
            if (i + 1 < kk)
                T(i, i + 1) = T(i + 1, i) = beta[i];
        }
        const double lmax = Eigen::SelfAdjointEigenSolver<dense_matrix>(T, Eigen::EigenvaluesOnly).eigenvalues()(kk - 1);

        const double b = std::sqrt(std::max(0.0, w.dot(B * w)));
        if (k > 0 && std::abs(lmax - prev) <= tol * std::abs(lmax))
            return lmax;
        if (b <= 1e-14 * std::max(1.0, std::abs(lmax)))
            return lmax;
        prev = lmax;
        beta.push_back(b);
        v = w / b;
    }
    return prev;
}

/// Eigenvalues (ascending) of the dense symmetric pencil (A, B), B positive definite.
inline dense_vector
generalized_eigenvalues(const dense_matrix& A, const dense_matrix& B)
{
    Eigen::GeneralizedSelfAdjointEigenSolver<dense_matrix> es(A, B, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw internal_error("generalized eigenvalue solver failed");
    return es.eigenvalues();
}

} // namespace hho
