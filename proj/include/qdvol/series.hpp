#pragma once

#include <algorithm>
#include <climits>
#include <vector>

#include "qdvol/rational.hpp"

namespace qdvol {

/// One-variable formal Laurent series with exact rational coefficients and
/// an explicit truncation order.  Coefficients live at exponents
/// [lo, order); everything below lo is exactly zero, everything at or above
/// order is unknown.  Orders are data: every operation records the tightest
/// order it can guarantee, and reading past it throws.
class TruncatedSeries {
  public:
    TruncatedSeries() : lo_(0), order_(0) {}

    static TruncatedSeries zero(int order) {
        TruncatedSeries s;
        s.lo_ = order;
        s.order_ = order;
        return s;
    }

    static TruncatedSeries monomial(const ExactScalar& c, int exp, int order) {
        TruncatedSeries s;
        s.lo_ = exp;
        s.order_ = order;
        if (exp < order) {
            s.c_.assign(static_cast<size_t>(order - exp), ExactScalar(0));
            s.c_[0] = c;
        } else {
            s.lo_ = order;
        }
        s.normalize();
        return s;
    }

    static TruncatedSeries from_coeffs(std::vector<ExactScalar> coeffs, int lo, int order) {
        TruncatedSeries s;
        s.lo_ = lo;
        s.order_ = order;
        coeffs.resize(static_cast<size_t>(std::max(0, order - lo)), ExactScalar(0));
        s.c_ = std::move(coeffs);
        s.normalize();
        return s;
    }

    int order() const { return order_; }
    bool known_zero() const { return c_.empty(); }

    /// Valuation when nonzero; for the (truncated) zero series this is the
    /// order, the best lower bound available.
    int valuation() const { return c_.empty() ? order_ : lo_; }

    const ExactScalar& coeff(int e) const {
        static const ExactScalar kZero(0);
        if (e >= order_)
            throw truncation_error("series coefficient " + std::to_string(e) +
                                   " beyond trusted order " + std::to_string(order_));
        if (e < lo_) return kZero;
        return c_[static_cast<size_t>(e - lo_)];
    }

    /// Coefficient of t^{-1}; the truncation window must include it.
    const ExactScalar& residue() const { return coeff(-1); }

    TruncatedSeries operator-() const {
        TruncatedSeries r(*this);
        for (auto& x : r.c_) x = -x;
        return r;
    }

    friend TruncatedSeries operator+(const TruncatedSeries& a, const TruncatedSeries& b) {
        int order = std::min(a.order_, b.order_);
        int lo = std::min(a.lo_, b.lo_);
        lo = std::min(lo, order);
        TruncatedSeries r;
        r.lo_ = lo;
        r.order_ = order;
        r.c_.assign(static_cast<size_t>(order - lo), ExactScalar(0));
        for (int e = lo; e < order; ++e) {
            ExactScalar v(0);
            if (e >= a.lo_ && e < a.order_) v += a.c_[static_cast<size_t>(e - a.lo_)];
            if (e >= b.lo_ && e < b.order_) v += b.c_[static_cast<size_t>(e - b.lo_)];
            r.c_[static_cast<size_t>(e - lo)] = v;
        }
        r.normalize();
        return r;
    }

    friend TruncatedSeries operator-(const TruncatedSeries& a, const TruncatedSeries& b) {
        return a + (-b);
    }

    TruncatedSeries scaled(const ExactScalar& k) const {
        if (k.is_zero()) return zero(order_);
        TruncatedSeries r(*this);
        for (auto& x : r.c_) x = x * k;
        return r;
    }

    TruncatedSeries shifted(int k) const {
        TruncatedSeries r(*this);
        r.lo_ += k;
        r.order_ += k;
        return r;
    }

    /// Product, optionally capped: coefficients at or above cap are dropped
    /// and the recorded order shrinks accordingly.
    friend TruncatedSeries mul(const TruncatedSeries& a, const TruncatedSeries& b,
                               int cap = INT_MAX) {
        int order = std::min(sat_add(a.order_, b.valuation()), sat_add(b.order_, a.valuation()));
        order = std::min(order, cap);
        if (a.c_.empty() || b.c_.empty()) return zero(order);
        int lo = a.lo_ + b.lo_;
        if (lo >= order) return zero(order);
        TruncatedSeries r;
        r.lo_ = lo;
        r.order_ = order;
        r.c_.assign(static_cast<size_t>(order - lo), ExactScalar(0));
        for (size_t i = 0; i < a.c_.size(); ++i) {
            if (a.c_[i].is_zero()) continue;
            int ea = a.lo_ + static_cast<int>(i);
            if (ea + b.lo_ >= order) break;
            size_t jmax = std::min(b.c_.size(), static_cast<size_t>(order - ea - b.lo_));
            for (size_t j = 0; j < jmax; ++j) {
                if (b.c_[j].is_zero()) continue;
                r.c_[i + j] += a.c_[i] * b.c_[j];
            }
        }
        r.normalize();
        return r;
    }

    friend TruncatedSeries operator*(const TruncatedSeries& a, const TruncatedSeries& b) {
        return mul(a, b);
    }

    TruncatedSeries inverse(int cap = INT_MAX) const {
        if (c_.empty()) throw domain_error("series: division by zero series");
        int v = lo_;
        int rel = order_ - v;  // trusted unit-part length
        rel = std::min(rel, cap == INT_MAX ? rel : cap + v);
        if (rel <= 0) return zero(-v + rel);
        std::vector<ExactScalar> d(static_cast<size_t>(rel), ExactScalar(0));
        const ExactScalar& c0 = c_[0];
        if (c0.is_zero()) throw inconsistency_error("series: unnormalized leading zero");
        d[0] = c0.reciprocal();
        for (int k = 1; k < rel; ++k) {
            ExactScalar acc(0);
            for (int j = 1; j <= k; ++j) {
                if (static_cast<size_t>(j) >= c_.size()) break;
                acc += c_[static_cast<size_t>(j)] * d[static_cast<size_t>(k - j)];
            }
            d[static_cast<size_t>(k)] = -acc / c0;
        }
        return from_coeffs(std::move(d), -v, -v + rel);
    }

    friend TruncatedSeries operator/(const TruncatedSeries& a, const TruncatedSeries& b) {
        return a * b.inverse();
    }

    TruncatedSeries pow(long e, int cap = INT_MAX) const {
        if (e == 0) {
            // t^0 with the relative precision this series would propagate
            return monomial(ExactScalar(1), 0, order_ - valuation());
        }
        if (e < 0) return inverse().pow(-e, cap);
        TruncatedSeries acc = *this;
        TruncatedSeries r = monomial(ExactScalar(1), 0, INT_MAX / 4);
        long k = e;
        while (k > 0) {
            if (k & 1) r = mul(r, acc, cap);
            k >>= 1;
            if (k) acc = mul(acc, acc, cap);
        }
        return r;
    }

    TruncatedSeries derivative() const {
        TruncatedSeries r;
        r.lo_ = lo_ - 1;
        r.order_ = order_ - 1;
        r.c_.assign(c_.size(), ExactScalar(0));
        for (size_t i = 0; i < c_.size(); ++i)
            r.c_[i] = c_[i] * ExactScalar(lo_ + static_cast<int>(i));
        r.normalize();
        return r;
    }

    /// Term-by-term primitive with zero constant term; requires no t^{-1} term.
    TruncatedSeries antiderivative() const {
        if (lo_ <= -1 && -1 < order_ && !coeff(-1).is_zero())
            throw domain_error("series: antiderivative of a t^{-1} term");
        TruncatedSeries r;
        r.lo_ = lo_ + 1;
        r.order_ = order_ + 1;
        r.c_.assign(c_.size(), ExactScalar(0));
        for (size_t i = 0; i < c_.size(); ++i) {
            int e = lo_ + static_cast<int>(i);
            if (e == -1) continue;
            r.c_[i] = c_[i] / ExactScalar(e + 1);
        }
        r.normalize();
        return r;
    }

    /// f(g) for inner series g of positive valuation.
    friend TruncatedSeries compose(const TruncatedSeries& f, const TruncatedSeries& g) {
        if (g.c_.empty() || g.valuation() < 1)
            throw domain_error("series: compose needs inner valuation >= 1");
        int gv = g.valuation();
        int order = std::min(sat_mul(f.order_, gv), sat_add(g.order_, (f.lo_ - 1) * gv));
        if (f.c_.empty()) return zero(order);
        TruncatedSeries r = zero(order);
        // nonnegative exponents by Horner from the top
        if (f.order_ > 0) {
            TruncatedSeries acc = zero(order);
            for (int k = f.order_ - 1; k >= std::max(0, f.lo_); --k) {
                acc = mul(acc, g, order);
                const ExactScalar& fk = f.coeff(k);
                if (!fk.is_zero()) acc = acc + monomial(fk, 0, order);
            }
            r = r + acc;
        }
        // negative exponents by Horner in 1/g
        if (f.lo_ < 0) {
            TruncatedSeries gi = g.inverse(order);
            TruncatedSeries acc = zero(order);
            for (int k = std::min(-1, f.order_ - 1); k >= f.lo_; --k) {
                acc = mul(acc, gi, order);
                const ExactScalar& fk = f.coeff(k);
                if (!fk.is_zero()) acc = acc + monomial(fk, 0, order);
            }
            acc = mul(acc, gi, order);
            r = r + acc;
        }
        return r;
    }

    /// log of a series with constant term 1.
    TruncatedSeries log() const {
        if (valuation() != 0 || coeff(0) != ExactScalar(1))
            throw domain_error("series: log needs constant term 1");
        TruncatedSeries d = derivative();
        return mul(d, inverse(), order_ - 1).antiderivative();
    }

    /// exp of a series with positive valuation.
    TruncatedSeries exp() const {
        if (!c_.empty() && valuation() < 1)
            throw domain_error("series: exp needs positive valuation");
        int order = order_;
        std::vector<ExactScalar> y(static_cast<size_t>(std::max(order, 1)), ExactScalar(0));
        y[0] = ExactScalar(1);
        for (int k = 1; k < order; ++k) {
            ExactScalar acc(0);
            for (int j = 1; j <= k; ++j) {
                if (j < lo_ || j >= order_) continue;
                acc += ExactScalar(j) * c_[static_cast<size_t>(j - lo_)] *
                       y[static_cast<size_t>(k - j)];
            }
            y[static_cast<size_t>(k)] = acc / ExactScalar(k);
        }
        return from_coeffs(std::move(y), 0, std::max(order, 1));
    }

    /// Exact square root: even valuation, leading coefficient a perfect
    /// rational square.
    TruncatedSeries sqrt() const {
        if (c_.empty()) throw domain_error("series: sqrt of zero series");
        int v = valuation();
        if (v % 2 != 0) throw domain_error("series: sqrt needs even valuation");
        auto c0 = c_[0].sqrt();
        if (!c0) throw domain_error("series: sqrt needs a perfect-square leading coefficient");
        int rel = order_ - v;
        std::vector<ExactScalar> w(static_cast<size_t>(rel), ExactScalar(0));
        w[0] = *c0;
        ExactScalar two_w0 = ExactScalar(2) * w[0];
        for (int k = 1; k < rel; ++k) {
            ExactScalar acc = c_[static_cast<size_t>(k)];
            for (int j = 1; j < k; ++j) acc -= w[static_cast<size_t>(j)] * w[static_cast<size_t>(k - j)];
            w[static_cast<size_t>(k)] = acc / two_w0;
        }
        return from_coeffs(std::move(w), v / 2, v / 2 + rel);
    }

    /// Compositional inverse of a series of valuation exactly 1, by Lagrange
    /// inversion: [t^n] b = (1/n) [u^{n-1}] (u/a)^n.
    TruncatedSeries reversion() const {
        if (c_.empty() || valuation() != 1)
            throw domain_error("series: reversion needs valuation exactly 1");
        int order = order_;
        TruncatedSeries h = shifted(-1).inverse(order);  // u/a(u), a unit
        std::vector<ExactScalar> b(static_cast<size_t>(order), ExactScalar(0));
        TruncatedSeries p = monomial(ExactScalar(1), 0, order);
        for (int n = 1; n < order; ++n) {
            p = mul(p, h, order);
            b[static_cast<size_t>(n)] = p.coeff(n - 1) / ExactScalar(n);
        }
        return from_coeffs(std::move(b), 0, order);
    }

    TruncatedSeries truncated(int cap) const {
        if (cap >= order_) return *this;
        TruncatedSeries r = *this;
        r.order_ = cap;
        r.c_.resize(static_cast<size_t>(std::max(0, cap - lo_)));
        if (r.lo_ > r.order_) r.lo_ = r.order_;
        r.normalize();
        return r;
    }

    friend bool operator==(const TruncatedSeries& a, const TruncatedSeries& b) {
        return a.lo_ == b.lo_ && a.order_ == b.order_ && a.c_ == b.c_;
    }

    std::string str() const {
        std::string out;
        for (size_t i = 0; i < c_.size(); ++i) {
            if (c_[i].is_zero()) continue;
            if (!out.empty()) out += " + ";
            out += c_[i].str() + "*t^" + std::to_string(lo_ + static_cast<int>(i));
        }
        if (out.empty()) out = "0";
        out += " + O(t^" + std::to_string(order_) + ")";
        return out;
    }

  private:
    static int sat_add(int a, int b) {
        long s = static_cast<long>(a) + b;
        return static_cast<int>(std::clamp<long>(s, INT_MIN / 2, INT_MAX / 2));
    }
    static int sat_mul(int a, int b) {
        long s = static_cast<long>(a) * b;
        return static_cast<int>(std::clamp<long>(s, INT_MIN / 2, INT_MAX / 2));
    }

    void normalize() {
        size_t skip = 0;
        while (skip < c_.size() && c_[skip].is_zero()) ++skip;
        if (skip) {
            c_.erase(c_.begin(), c_.begin() + static_cast<long>(skip));
            lo_ += static_cast<int>(skip);
        }
        if (c_.empty()) lo_ = order_;
    }

    int lo_;
    int order_;
    std::vector<ExactScalar> c_;
};

}  // namespace qdvol
