#pragma once

#include <vector>

#include "qdvol/rational.hpp"

namespace qdvol {

/// Solves A x = rhs exactly by fraction-free (Bareiss) elimination on the
/// denominator-cleared integer matrix.  Throws on a singular system.
inline std::vector<ExactScalar> solve_fraction_free(
    std::vector<std::vector<ExactScalar>> A, std::vector<ExactScalar> rhs) {
    const size_t n = A.size();
    if (n == 0 || rhs.size() != n)
        throw domain_error("solve_fraction_free: shape mismatch");
    for (const auto& row : A)
        if (row.size() != n) throw domain_error("solve_fraction_free: shape mismatch");

    // clear denominators row by row
    std::vector<std::vector<Int>> M(n, std::vector<Int>(n + 1));
    for (size_t i = 0; i < n; ++i) {
        Int l = 1;
        for (size_t j = 0; j < n; ++j) l = lcm(l, A[i][j].denominator());
        l = lcm(l, rhs[i].denominator());
        for (size_t j = 0; j < n; ++j)
            M[i][j] = A[i][j].numerator() * (l / A[i][j].denominator());
        M[i][n] = rhs[i].numerator() * (l / rhs[i].denominator());
    }

    Int prev = 1;
    for (size_t k = 0; k + 1 < n; ++k) {
        if (sgn(M[k][k]) == 0) {
            size_t p = k + 1;
            while (p < n && sgn(M[p][k]) == 0) ++p;
            if (p == n) throw inconsistency_error("solve_fraction_free: singular system");
            std::swap(M[k], M[p]);
            for (auto& x : M[k]) x = -x;  // keep the determinant sign
        }
        for (size_t i = k + 1; i < n; ++i) {
            for (size_t j = k + 1; j <= n; ++j) {
                Int v = M[i][j] * M[k][k] - M[i][k] * M[k][j];
                mpz_divexact(v.get_mpz_t(), v.get_mpz_t(), prev.get_mpz_t());
                M[i][j] = v;
            }
            M[i][k] = 0;
        }
        prev = M[k][k];
    }
    if (sgn(M[n - 1][n - 1]) == 0)
        throw inconsistency_error("solve_fraction_free: singular system");

    std::vector<ExactScalar> x(n, ExactScalar(0));
    for (size_t ii = n; ii-- > 0;) {
        ExactScalar acc(M[ii][n]);
        for (size_t j = ii + 1; j < n; ++j) acc -= ExactScalar(M[ii][j]) * x[j];
        x[ii] = acc / ExactScalar(M[ii][ii]);
    }
    return x;
}

}  // namespace qdvol
