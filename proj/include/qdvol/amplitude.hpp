#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "qdvol/laurent.hpp"
#include "qdvol/rational.hpp"

namespace qdvol {

/// Exponent multiset, canonically sorted ascending (most negative first).
using ExpKey = std::vector<int>;

inline ExpKey sorted_key(ExpKey k) {
    std::sort(k.begin(), k.end());
    return k;
}

inline ExpKey key_with(const ExpKey& k, int extra) {
    ExpKey r;
    r.reserve(k.size() + 1);
    auto pos = std::lower_bound(k.begin(), k.end(), extra);
    r.insert(r.end(), k.begin(), pos);
    r.push_back(extra);
    r.insert(r.end(), pos, k.end());
    return r;
}

inline ExpKey key_without(const ExpKey& k, size_t idx) {
    ExpKey r;
    r.reserve(k.size() - 1);
    for (size_t i = 0; i < k.size(); ++i)
        if (i != idx) r.push_back(k[i]);
    return r;
}

/// Multivariate Laurent polynomial in 1/t_1,...,1/t_n (every exponent
/// <= -1), symmetric under permutation of the variables.  Terms are stored
/// once per sorted exponent multiset; the recursion writes each coefficient
/// through several first-variable arrangements and set_checked verifies they
/// agree, which is the runtime symmetry assertion.
class Amplitude {
  public:
    explicit Amplitude(int arity) : arity_(arity) {}

    int arity() const { return arity_; }
    const std::map<ExpKey, ExactScalar>& terms() const { return terms_; }
    size_t term_count() const { return terms_.size(); }

    ExactScalar coefficient(const ExpKey& exponents) const {
        if (static_cast<int>(exponents.size()) != arity_)
            throw domain_error("Amplitude: exponent tuple arity mismatch");
        auto it = terms_.find(sorted_key(exponents));
        return it == terms_.end() ? ExactScalar(0) : it->second;
    }

    void set_checked(const ExpKey& sorted, const ExactScalar& value) {
        if (value.is_zero()) {
            auto it = terms_.find(sorted);
            if (it != terms_.end() && !it->second.is_zero())
                throw inconsistency_error("Amplitude: symmetry violation (zero vs nonzero)");
            return;
        }
        auto [it, inserted] = terms_.emplace(sorted, value);
        if (!inserted && it->second != value)
            throw inconsistency_error("Amplitude: symmetry violation at key");
    }

    /// Largest single-variable pole order over all terms.
    int max_pole_order() const {
        int p = 0;
        for (const auto& [k, c] : terms_)
            if (!k.empty()) p = std::max(p, -k.front());
        return p;
    }

    friend bool operator==(const Amplitude& a, const Amplitude& b) {
        return a.arity_ == b.arity_ && a.terms_ == b.terms_;
    }

  private:
    int arity_;
    std::map<ExpKey, ExactScalar> terms_;
};

/// Symmetric table of F_{g,n}[k_1,...,k_n] coefficients, keyed by index
/// tuples sorted descending (k_1 >= ... >= k_n >= 0).  Entries beyond total
/// degree 3g-3+n are rejected.
struct FTable {
    int g = 0;
    int n = 0;
    std::map<std::vector<int>, ExactScalar> entries;

    static std::vector<int> canonical(std::vector<int> k) {
        std::sort(k.begin(), k.end(), std::greater<int>());
        return k;
    }

    void insert(std::vector<int> k, const ExactScalar& v) {
        if (v.is_zero()) return;
        k = canonical(std::move(k));
        long total = 0;
        for (int x : k) {
            if (x < 0) throw domain_error("FTable: negative index");
            total += x;
        }
        if (total > 3L * g - 3 + n)
            throw inconsistency_error("FTable: entry beyond total degree 3g-3+n");
        auto [it, inserted] = entries.emplace(std::move(k), v);
        if (!inserted && it->second != v)
            throw inconsistency_error("FTable: conflicting values for one index tuple");
    }

    ExactScalar at(std::vector<int> k) const {
        if (static_cast<int>(k.size()) != n)
            throw domain_error("FTable: index tuple arity mismatch");
        auto it = entries.find(canonical(std::move(k)));
        return it == entries.end() ? ExactScalar(0) : it->second;
    }

    ExactScalar zero_entry() const { return at(std::vector<int>(static_cast<size_t>(n), 0)); }
};

}  // namespace qdvol
