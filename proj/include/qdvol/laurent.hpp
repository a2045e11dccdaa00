#pragma once

#include <map>
#include <string>

#include "qdvol/rational.hpp"
#include "qdvol/series.hpp"

namespace qdvol {

/// Finite Laurent polynomial with poles only at 0: exponents <= 0.
class LaurentPoly {
  public:
    LaurentPoly() = default;

    static LaurentPoly monomial(const ExactScalar& c, int exp) {
        LaurentPoly p;
        p.add_term(exp, c);
        return p;
    }

    void add_term(int exp, const ExactScalar& c) {
        if (exp > 0) throw domain_error("LaurentPoly: positive exponent");
        if (c.is_zero()) return;
        auto [it, inserted] = terms_.emplace(exp, c);
        if (!inserted) {
            it->second += c;
            if (it->second.is_zero()) terms_.erase(it);
        }
    }

    const std::map<int, ExactScalar>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    ExactScalar coeff(int exp) const {
        auto it = terms_.find(exp);
        return it == terms_.end() ? ExactScalar(0) : it->second;
    }

    /// Largest p with a nonzero t^{-p} term; 0 for the zero polynomial.
    int top_pole_order() const { return terms_.empty() ? 0 : -terms_.begin()->first; }

    LaurentPoly operator-() const {
        LaurentPoly r;
        for (const auto& [e, c] : terms_) r.terms_.emplace(e, -c);
        return r;
    }

    friend LaurentPoly operator+(const LaurentPoly& a, const LaurentPoly& b) {
        LaurentPoly r = a;
        for (const auto& [e, c] : b.terms_) r.add_term(e, c);
        return r;
    }
    friend LaurentPoly operator-(const LaurentPoly& a, const LaurentPoly& b) {
        return a + (-b);
    }
    friend LaurentPoly operator*(const LaurentPoly& a, const LaurentPoly& b) {
        LaurentPoly r;
        for (const auto& [ea, ca] : a.terms_)
            for (const auto& [eb, cb] : b.terms_) r.add_term(ea + eb, ca * cb);
        return r;
    }

    LaurentPoly scaled(const ExactScalar& k) const {
        LaurentPoly r;
        if (k.is_zero()) return r;
        for (const auto& [e, c] : terms_) r.terms_.emplace(e, c * k);
        return r;
    }

    LaurentPoly derivative() const {
        LaurentPoly r;
        for (const auto& [e, c] : terms_)
            if (e != 0) r.terms_.emplace(e - 1, c * ExactScalar(e));
        return r;
    }

    TruncatedSeries to_series(int order) const {
        TruncatedSeries s = TruncatedSeries::zero(order);
        for (const auto& [e, c] : terms_)
            s = s + TruncatedSeries::monomial(c, e, order);
        return s;
    }

    friend bool operator==(const LaurentPoly& a, const LaurentPoly& b) {
        return a.terms_ == b.terms_;
    }

    std::string str(const std::string& var = "t") const {
        if (terms_.empty()) return "0";
        std::string out;
        for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
            if (!out.empty()) out += " + ";
            out += it->second.str() + "*" + var + "^" + std::to_string(it->first);
        }
        return out;
    }

  private:
    std::map<int, ExactScalar> terms_;
};

}  // namespace qdvol
