#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace qdvol {

using Int = mpz_class;

/// Bad input to an operation (out-of-domain argument, empty stratum, ...).
struct domain_error : std::domain_error {
    using std::domain_error::domain_error;
};

/// A series coefficient beyond the trusted truncation window was requested.
struct truncation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An internal consistency check failed (symmetry, decomposition remainder,
/// singular extraction system).  Always a bug or insufficient truncation.
struct inconsistency_error : std::logic_error {
    using std::logic_error::logic_error;
};

/// Arbitrary-precision rational, always in lowest terms with positive
/// denominator.  Arithmetic is exact; normalization happens eagerly on
/// every construction so equality is plain comparison.
class ExactScalar {
  public:
    ExactScalar() : v_(0) {}
    ExactScalar(long n) : v_(n) {}           // NOLINT: implicit on purpose
    ExactScalar(const Int& n) : v_(n) {}     // NOLINT
    ExactScalar(long num, long den) : v_(num, den) { canonicalize(); }
    ExactScalar(const Int& num, const Int& den) : v_(num, den) { canonicalize(); }
    explicit ExactScalar(const mpq_class& q) : v_(q) { v_.canonicalize(); }

    static ExactScalar from_strings(const std::string& num, const std::string& den) {
        Int n, d;
        if (n.set_str(num, 10) != 0 || d.set_str(den, 10) != 0)
            throw domain_error("ExactScalar: malformed decimal integer string");
        return ExactScalar(n, d);
    }

    const Int& numerator() const { return v_.get_num(); }
    const Int& denominator() const { return v_.get_den(); }

    bool is_zero() const { return sgn(v_) == 0; }
    bool is_integer() const { return v_.get_den() == 1; }
    int sign() const { return sgn(v_); }

    ExactScalar operator-() const { return ExactScalar(mpq_class(-v_)); }
    ExactScalar& operator+=(const ExactScalar& o) { v_ += o.v_; return *this; }
    ExactScalar& operator-=(const ExactScalar& o) { v_ -= o.v_; return *this; }
    ExactScalar& operator*=(const ExactScalar& o) { v_ *= o.v_; return *this; }
    ExactScalar& operator/=(const ExactScalar& o) {
        if (o.is_zero()) throw domain_error("ExactScalar: division by zero");
        v_ /= o.v_;
        return *this;
    }

    friend ExactScalar operator+(ExactScalar a, const ExactScalar& b) { a += b; return a; }
    friend ExactScalar operator-(ExactScalar a, const ExactScalar& b) { a -= b; return a; }
    friend ExactScalar operator*(ExactScalar a, const ExactScalar& b) { a *= b; return a; }
    friend ExactScalar operator/(ExactScalar a, const ExactScalar& b) { a /= b; return a; }

    friend bool operator==(const ExactScalar& a, const ExactScalar& b) { return a.v_ == b.v_; }
    friend bool operator!=(const ExactScalar& a, const ExactScalar& b) { return a.v_ != b.v_; }
    friend bool operator<(const ExactScalar& a, const ExactScalar& b) { return a.v_ < b.v_; }
    friend bool operator>(const ExactScalar& a, const ExactScalar& b) { return a.v_ > b.v_; }
    friend bool operator<=(const ExactScalar& a, const ExactScalar& b) { return a.v_ <= b.v_; }
    friend bool operator>=(const ExactScalar& a, const ExactScalar& b) { return a.v_ >= b.v_; }

    ExactScalar reciprocal() const {
        if (is_zero()) throw domain_error("ExactScalar: reciprocal of zero");
        return ExactScalar(denominator(), numerator());
    }

    ExactScalar pow(long e) const {
        if (e == 0) return ExactScalar(1);
        if (e < 0) return reciprocal().pow(-e);
        mpq_class r;
        mpz_pow_ui(r.get_num_mpz_t(), v_.get_num_mpz_t(), static_cast<unsigned long>(e));
        mpz_pow_ui(r.get_den_mpz_t(), v_.get_den_mpz_t(), static_cast<unsigned long>(e));
        return ExactScalar(r);
    }

    /// Exact square root when both numerator and denominator are perfect
    /// squares (and the value is nonnegative); nullopt otherwise.
    std::optional<ExactScalar> sqrt() const {
        if (sign() < 0) return std::nullopt;
        if (is_zero()) return ExactScalar(0);
        if (!mpz_perfect_square_p(v_.get_num_mpz_t()) ||
            !mpz_perfect_square_p(v_.get_den_mpz_t()))
            return std::nullopt;
        Int n, d;
        mpz_sqrt(n.get_mpz_t(), v_.get_num_mpz_t());
        mpz_sqrt(d.get_mpz_t(), v_.get_den_mpz_t());
        return ExactScalar(n, d);
    }

    double to_double() const { return v_.get_d(); }

    std::string str() const {
        if (is_integer()) return v_.get_num().get_str();
        return v_.get_num().get_str() + "/" + v_.get_den().get_str();
    }

    const mpq_class& raw() const { return v_; }

  private:
    void canonicalize() {
        if (sgn(v_.get_den()) == 0) throw domain_error("ExactScalar: zero denominator");
        v_.canonicalize();
    }

    mpq_class v_;
};

inline ExactScalar parse_rational(const std::string& s) {
    auto slash = s.find('/');
    if (slash == std::string::npos) return ExactScalar::from_strings(s, "1");
    return ExactScalar::from_strings(s.substr(0, slash), s.substr(slash + 1));
}

/// An exact value q * pi^e.  The zero value is canonical (pi_power 0).
/// Addition is defined only between equal powers of pi; every formula in
/// scope produces a single power, so a mixed sum indicates a bug upstream.
class PiScalar {
  public:
    PiScalar() : coeff_(0), pi_power_(0) {}
    PiScalar(ExactScalar coeff, int pi_power)
        : coeff_(std::move(coeff)), pi_power_(coeff_.is_zero() ? 0 : pi_power) {}

    static PiScalar zero() { return PiScalar(); }

    const ExactScalar& coefficient() const { return coeff_; }
    int pi_power() const { return pi_power_; }
    bool is_zero() const { return coeff_.is_zero(); }

    friend PiScalar operator*(const PiScalar& a, const PiScalar& b) {
        return PiScalar(a.coeff_ * b.coeff_, a.pi_power_ + b.pi_power_);
    }
    friend PiScalar operator/(const PiScalar& a, const PiScalar& b) {
        if (b.is_zero()) throw domain_error("PiScalar: division by zero");
        return PiScalar(a.coeff_ / b.coeff_, a.pi_power_ - b.pi_power_);
    }
    friend PiScalar operator+(const PiScalar& a, const PiScalar& b) {
        if (a.is_zero()) return b;
        if (b.is_zero()) return a;
        if (a.pi_power_ != b.pi_power_)
            throw domain_error("PiScalar: sum of distinct pi powers");
        return PiScalar(a.coeff_ + b.coeff_, a.pi_power_);
    }
    friend PiScalar operator-(const PiScalar& a, const PiScalar& b) {
        return a + PiScalar(-b.coeff_, b.pi_power_);
    }

    PiScalar scaled(const ExactScalar& c) const { return PiScalar(coeff_ * c, pi_power_); }

    friend bool operator==(const PiScalar& a, const PiScalar& b) {
        return a.coeff_ == b.coeff_ && a.pi_power_ == b.pi_power_;
    }
    friend bool operator!=(const PiScalar& a, const PiScalar& b) { return !(a == b); }

    double to_double() const;

    /// Canonical rendering "<num>/<den> * pi^<e>".
    std::string str() const {
        return coeff_.numerator().get_str() + "/" + coeff_.denominator().get_str() +
               " * pi^" + std::to_string(pi_power_);
    }

  private:
    ExactScalar coeff_;
    int pi_power_;
};

inline double PiScalar::to_double() const {
    constexpr double kPi = 3.14159265358979323846;
    double v = coeff_.to_double();
    int e = pi_power_;
    while (e > 0) { v *= kPi; --e; }
    while (e < 0) { v /= kPi; ++e; }
    return v;
}

/// Parses the canonical "<num>/<den> * pi^<e>" rendering (den optional).
inline PiScalar parse_pi_scalar(const std::string& s) {
    auto star = s.find('*');
    if (star == std::string::npos) return PiScalar(parse_rational(s), 0);
    std::string head = s.substr(0, star);
    while (!head.empty() && head.back() == ' ') head.pop_back();
    auto caret = s.find('^', star);
    if (caret == std::string::npos) throw domain_error("PiScalar: missing exponent");
    return PiScalar(parse_rational(head), std::stoi(s.substr(caret + 1)));
}

}  // namespace qdvol
