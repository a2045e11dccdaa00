#pragma once

#include <algorithm>
#include <map>
#include <mutex>
#include <numeric>
#include <utility>
#include <vector>

#include "qdvol/combinatorics.hpp"
#include "qdvol/rational.hpp"

namespace qdvol {

/// A correlator index <tau_{d_1} ... tau_{d_n}>_g; indices canonically
/// sorted descending.
struct TauIndex {
    int g = 0;
    std::vector<int> indices;

    TauIndex() = default;
    TauIndex(int genus, std::vector<int> d) : g(genus), indices(std::move(d)) {
        for (int x : indices)
            if (x < 0) throw domain_error("TauIndex: negative index");
        std::sort(indices.begin(), indices.end(), std::greater<int>());
    }

    int n() const { return static_cast<int>(indices.size()); }
    bool stable() const { return 2 * g - 2 + n() > 0; }
    long total_degree() const { return std::accumulate(indices.begin(), indices.end(), 0L); }
    bool dimension_ok() const { return total_degree() == 3L * g - 3 + n(); }

    friend bool operator<(const TauIndex& a, const TauIndex& b) {
        if (a.g != b.g) return a.g < b.g;
        return a.indices < b.indices;
    }
    friend bool operator==(const TauIndex& a, const TauIndex& b) {
        return a.g == b.g && a.indices == b.indices;
    }
};

/// Psi-class intersection numbers on Mbar_{g,n} via the Virasoro/DVV
/// recursion in double-factorial normalization, seeded by <tau_0^3>_0 = 1
/// and <tau_1>_1 = 1/24.  Values are exact rationals; memoized.
class WittenKontsevich {
  public:
    ExactScalar correlator(const TauIndex& idx) {
        if (!idx.stable()) throw domain_error("tau correlator: unstable (g,n)");
        return eval(idx);
    }

    ExactScalar correlator(int g, std::vector<int> d) {
        return correlator(TauIndex(g, std::move(d)));
    }

    struct ReducedTerm {
        ExactScalar coeff;
        TauIndex idx;
    };

    /// String (removes a tau_0, lowering each other index in turn) or
    /// dilaton (removes a tau_1 with factor 2g-2+n-1); string is preferred
    /// when both apply.
    std::vector<ReducedTerm> string_dilaton_reduce(const TauIndex& idx) const {
        const auto& d = idx.indices;
        auto zero_it = std::find(d.begin(), d.end(), 0);
        if (zero_it != d.end()) {
            size_t zpos = static_cast<size_t>(zero_it - d.begin());
            std::vector<ReducedTerm> out;
            for (size_t i = 0; i < d.size(); ++i) {
                if (i == zpos || d[i] == 0) continue;
                std::vector<int> rest;
                rest.reserve(d.size() - 1);
                for (size_t j = 0; j < d.size(); ++j) {
                    if (j == zpos) continue;
                    rest.push_back(j == i ? d[j] - 1 : d[j]);
                }
                out.push_back({ExactScalar(1), TauIndex(idx.g, std::move(rest))});
            }
            return out;
        }
        auto one_it = std::find(d.begin(), d.end(), 1);
        if (one_it != d.end()) {
            std::vector<int> rest;
            rest.reserve(d.size() - 1);
            bool dropped = false;
            for (int x : d) {
                if (!dropped && x == 1) {
                    dropped = true;
                    continue;
                }
                rest.push_back(x);
            }
            ExactScalar factor(2 * idx.g - 2 + idx.n() - 1);
            return {{factor, TauIndex(idx.g, std::move(rest))}};
        }
        throw domain_error("string_dilaton_reduce: no tau_0 or tau_1 present");
    }

    /// Evaluates a reduced combination; terms with unstable or
    /// dimension-violating indices contribute zero.
    ExactScalar evaluate_combination(const std::vector<ReducedTerm>& terms) {
        ExactScalar acc(0);
        for (const auto& t : terms) {
            if (!t.idx.stable()) continue;
            acc += t.coeff * eval(t.idx);
        }
        return acc;
    }

    /// <tau_2^{3g-3}>_g, the top pure-psi intersection number.
    ExactScalar psi2_top_intersection(int g) {
        if (g < 2) throw domain_error("psi2_top_intersection: needs g >= 2");
        return correlator(g, std::vector<int>(static_cast<size_t>(3 * g - 3), 2));
    }

  private:
    ExactScalar eval(const TauIndex& idx) {
        if (!idx.dimension_ok()) return ExactScalar(0);
        {
            std::lock_guard lk(mu_);
            auto it = memo_.find(idx);
            if (it != memo_.end()) return it->second;
        }
        ExactScalar value = compute(idx);
        std::lock_guard lk(mu_);
        memo_.emplace(idx, value);
        return value;
    }

    ExactScalar compute(const TauIndex& idx) {
        const int g = idx.g;
        const auto& d = idx.indices;
        const int n = idx.n();
        if (g == 0 && n == 3) return ExactScalar(1);
        if (g == 1 && n == 1) return ExactScalar(1, 24);  // <tau_1>_1

        // DVV with the largest index distinguished (it is >= 1 here).
        const int d1 = d.front();
        std::vector<int> rest(d.begin() + 1, d.end());
        ExactScalar rhs(0);

        for (size_t j = 0; j < rest.size(); ++j) {
            std::vector<int> merged;
            merged.reserve(rest.size());
            for (size_t i = 0; i < rest.size(); ++i)
                merged.push_back(i == j ? d1 + rest[i] - 1 : rest[i]);
            ExactScalar f = double_factorial(2 * (d1 + rest[j]) - 1) /
                            double_factorial(2 * rest[j] - 1);
            TauIndex sub(g, std::move(merged));
            if (sub.stable()) rhs += f * eval(sub);
        }

        for (int a = 0; a <= d1 - 2; ++a) {
            int b = d1 - 2 - a;
            ExactScalar w = double_factorial(2 * a + 1) * double_factorial(2 * b + 1);
            if (g >= 1) {
                std::vector<int> sub = rest;
                sub.push_back(a);
                sub.push_back(b);
                TauIndex t(g - 1, std::move(sub));
                if (t.stable()) rhs += ExactScalar(1, 2) * w * eval(t);
            }
            size_t m = rest.size();
            for (unsigned long mask = 0; mask < (1ul << m); ++mask) {
                std::vector<int> left{a}, right{b};
                for (size_t i = 0; i < m; ++i)
                    ((mask >> i) & 1ul ? left : right).push_back(rest[i]);
                for (int g1 = 0; g1 <= g; ++g1) {
                    TauIndex t1(g1, left), t2(g - g1, right);
                    if (!t1.stable() || !t2.stable()) continue;
                    rhs += ExactScalar(1, 2) * w * eval(t1) * eval(t2);
                }
            }
        }

        return rhs / double_factorial(2 * d1 + 1);
    }

    std::mutex mu_;
    std::map<TauIndex, ExactScalar> memo_;
};

}  // namespace qdvol
