#pragma once

#include <string>
#include <vector>

#include "qdvol/rational.hpp"

namespace qdvol {

/// Polynomial in the variable n with exact rational coefficients, ascending
/// degree; the trailing coefficient is nonzero unless the polynomial is zero.
class RationalPolynomial {
  public:
    RationalPolynomial() = default;
    explicit RationalPolynomial(std::vector<ExactScalar> coeffs) : c_(std::move(coeffs)) {
        trim();
    }
    static RationalPolynomial constant(const ExactScalar& v) {
        return RationalPolynomial({v});
    }
    static RationalPolynomial linear(const ExactScalar& c0, const ExactScalar& c1) {
        return RationalPolynomial({c0, c1});
    }

    bool is_zero() const { return c_.empty(); }
    int degree() const { return static_cast<int>(c_.size()) - 1; }  // -1 for zero
    const std::vector<ExactScalar>& coefficients() const { return c_; }

    ExactScalar leading() const {
        if (c_.empty()) return ExactScalar(0);
        return c_.back();
    }

    ExactScalar operator()(const ExactScalar& n) const {
        ExactScalar acc(0);
        for (size_t i = c_.size(); i-- > 0;) acc = acc * n + c_[i];
        return acc;
    }

    friend RationalPolynomial operator+(const RationalPolynomial& a,
                                        const RationalPolynomial& b) {
        std::vector<ExactScalar> c(std::max(a.c_.size(), b.c_.size()), ExactScalar(0));
        for (size_t i = 0; i < a.c_.size(); ++i) c[i] += a.c_[i];
        for (size_t i = 0; i < b.c_.size(); ++i) c[i] += b.c_[i];
        return RationalPolynomial(std::move(c));
    }

    friend RationalPolynomial operator*(const RationalPolynomial& a,
                                        const RationalPolynomial& b) {
        if (a.is_zero() || b.is_zero()) return RationalPolynomial();
        std::vector<ExactScalar> c(a.c_.size() + b.c_.size() - 1, ExactScalar(0));
        for (size_t i = 0; i < a.c_.size(); ++i)
            for (size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
        return RationalPolynomial(std::move(c));
    }

    RationalPolynomial scaled(const ExactScalar& k) const {
        std::vector<ExactScalar> c = c_;
        for (auto& x : c) x *= k;
        return RationalPolynomial(std::move(c));
    }

    std::string str(const std::string& var = "n") const {
        if (c_.empty()) return "0";
        std::string out;
        for (size_t i = c_.size(); i-- > 0;) {
            if (c_[i].is_zero()) continue;
            if (!out.empty()) out += " + ";
            if (i == 0)
                out += c_[i].str();
            else if (i == 1)
                out += c_[i].str() + "*" + var;
            else
                out += c_[i].str() + "*" + var + "^" + std::to_string(i);
        }
        return out.empty() ? "0" : out;
    }

    friend bool operator==(const RationalPolynomial& a, const RationalPolynomial& b) {
        return a.c_ == b.c_;
    }

  private:
    void trim() {
        while (!c_.empty() && c_.back().is_zero()) c_.pop_back();
    }
    std::vector<ExactScalar> c_;
};

}  // namespace qdvol
