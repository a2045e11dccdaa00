#pragma once

#include <mutex>
#include <shared_mutex>
#include <vector>

#include "qdvol/rational.hpp"

namespace qdvol {

inline Int factorial(long n) {
    if (n < 0) throw domain_error("factorial: negative argument");
    Int r;
    mpz_fac_ui(r.get_mpz_t(), static_cast<unsigned long>(n));
    return r;
}

/// k!! with the conventions (-1)!! = 1 and (-3)!! = -1.  Other negative
/// arguments are out of domain.
inline ExactScalar double_factorial(long k) {
    if (k == -1) return ExactScalar(1);
    if (k == -3) return ExactScalar(-1);
    if (k < 0) throw domain_error("double_factorial: undefined for k < -3 or k = -2");
    Int r;
    mpz_2fac_ui(r.get_mpz_t(), static_cast<unsigned long>(k));
    return ExactScalar(r);
}

inline Int binomial(long n, long k) {
    if (k < 0 || k > n) return 0;
    Int r;
    mpz_bin_uiui(r.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
    return r;
}

/// gamma_k = 4^{-k} C(2k, k) = (2k-1)!!/(2k)!!.
inline ExactScalar gamma_k(long k) {
    if (k < 0) throw domain_error("gamma_k: negative index");
    return ExactScalar(binomial(2 * k, k), Int(Int(1) << (2 * k)));
}

/// Ratio a!!/b!! for a >= b >= -3 of the same parity, as an exact rational.
inline ExactScalar double_factorial_ratio(long a, long b) {
    return double_factorial(a) / double_factorial(b);
}

/// Memoized Bernoulli numbers B_n = B_n(0), generating series t/(e^t - 1).
/// Concurrent reads; insertions serialized.
class BernoulliTable {
  public:
    ExactScalar number(long n) {
        if (n < 0) throw domain_error("bernoulli: negative index");
        {
            std::shared_lock lk(mu_);
            if (static_cast<size_t>(n) < values_.size()) return values_[n];
        }
        std::unique_lock lk(mu_);
        while (values_.size() <= static_cast<size_t>(n)) {
            long m = static_cast<long>(values_.size());
            if (m == 0) {
                values_.emplace_back(1);
                continue;
            }
            // sum_{j=0}^{m} C(m+1, j) B_j = 0
            ExactScalar acc(0);
            for (long j = 0; j < m; ++j)
                acc += ExactScalar(binomial(m + 1, j)) * values_[j];
            values_.push_back(-acc / ExactScalar(m + 1));
        }
        return values_[n];
    }

    ExactScalar polynomial(long n, const ExactScalar& x) {
        if (n < 0) throw domain_error("bernoulli_polynomial: negative degree");
        // B_n(x) = sum_m C(n,m) B_m x^{n-m}
        ExactScalar acc(0);
        ExactScalar xp(1);
        for (long m = n; m >= 0; --m) {
            acc += ExactScalar(binomial(n, m)) * number(m) * xp;
            xp *= x;
        }
        return acc;
    }

    static BernoulliTable& global() {
        static BernoulliTable t;
        return t;
    }

  private:
    std::shared_mutex mu_;
    std::vector<ExactScalar> values_;
};

inline ExactScalar bernoulli_number(long n) { return BernoulliTable::global().number(n); }

inline ExactScalar bernoulli_polynomial(long n, const ExactScalar& x) {
    return BernoulliTable::global().polynomial(n, x);
}

}  // namespace qdvol
