#include <catch2/catch_amalgamated.hpp>

#include "qdvol/combinatorics.hpp"
#include "qdvol/rational.hpp"
#include "qdvol/series.hpp"

using namespace qdvol;

TEST_CASE("ExactScalar stays in lowest terms with positive denominator") {
    ExactScalar a(2, 6);
    CHECK(a.numerator() == 1);
    CHECK(a.denominator() == 3);
    ExactScalar b(4, -8);
    CHECK(b.numerator() == -1);
    CHECK(b.denominator() == 2);
    CHECK(ExactScalar(1, 3) + ExactScalar(2, 6) == ExactScalar(2, 3));
    CHECK((ExactScalar(7, 3) * ExactScalar(3, 7)).is_integer());
    CHECK_THROWS_AS(ExactScalar(1, 0), domain_error);
    CHECK_THROWS_AS(ExactScalar(1) / ExactScalar(0), domain_error);
    CHECK(ExactScalar(0).str() == "0");
    CHECK(ExactScalar(-41, 46080).str() == "-41/46080");
    CHECK(parse_rational("-41/46080") == ExactScalar(-41, 46080));
    CHECK(parse_rational("17") == ExactScalar(17));
}

TEST_CASE("ExactScalar pow and sqrt") {
    CHECK(ExactScalar(-2, 3).pow(3) == ExactScalar(-8, 27));
    CHECK(ExactScalar(2).pow(-2) == ExactScalar(1, 4));
    CHECK(ExactScalar(9, 16).sqrt().value() == ExactScalar(3, 4));
    CHECK_FALSE(ExactScalar(2).sqrt().has_value());
    CHECK_FALSE(ExactScalar(-4).sqrt().has_value());
}

TEST_CASE("PiScalar mixed powers refuse to add") {
    PiScalar a(ExactScalar(1, 3), 4);
    PiScalar b(ExactScalar(2, 3), 4);
    CHECK((a + b) == PiScalar(ExactScalar(1), 4));
    CHECK_THROWS_AS(a + PiScalar(ExactScalar(1), 2), domain_error);
    CHECK((a + PiScalar::zero()) == a);
    PiScalar z(ExactScalar(0), 7);
    CHECK(z.pi_power() == 0);  // canonical zero
    CHECK((a * PiScalar(ExactScalar(3), -2)) == PiScalar(ExactScalar(1), 2));
    CHECK(a.str() == "1/3 * pi^4");
    CHECK(parse_pi_scalar("1/3 * pi^4") == a);
    CHECK(parse_pi_scalar("7/3 * pi^-2") == PiScalar(ExactScalar(7, 3), -2));
}

TEST_CASE("double factorial conventions") {
    CHECK(double_factorial(-1) == ExactScalar(1));
    CHECK(double_factorial(-3) == ExactScalar(-1));
    CHECK(double_factorial(0) == ExactScalar(1));
    CHECK(double_factorial(5) == ExactScalar(15));
    CHECK(double_factorial(6) == ExactScalar(48));
    CHECK_THROWS_AS(double_factorial(-2), domain_error);
    CHECK_THROWS_AS(double_factorial(-5), domain_error);
    for (long k = 1; k <= 40; ++k)
        CHECK(double_factorial(k) * double_factorial(k - 1) == ExactScalar(factorial(k)));
}

TEST_CASE("gamma_k values and integrality") {
    CHECK(gamma_k(0) == ExactScalar(1));
    CHECK(gamma_k(1) == ExactScalar(1, 2));
    CHECK(gamma_k(2) == ExactScalar(3, 8));
    CHECK_THROWS_AS(gamma_k(-1), domain_error);
    for (long k = 0; k <= 60; ++k) {
        ExactScalar v = gamma_k(k) * ExactScalar(Int(Int(1) << (2 * k)));
        CHECK(v.is_integer());
        // gamma_k = (2k-1)!!/(2k)!!
        CHECK(gamma_k(k) == double_factorial(2 * k - 1) / double_factorial(2 * k));
    }
}

namespace {
// independent oracle: expand t e^{tx} / (e^t - 1) as a series in t
ExactScalar bernoulli_poly_series_oracle(int n, const ExactScalar& x) {
    int order = n + 2;
    std::vector<ExactScalar> expct(static_cast<size_t>(order), ExactScalar(0));
    std::vector<ExactScalar> expden(static_cast<size_t>(order), ExactScalar(0));
    ExactScalar fact(1);
    for (int k = 0; k < order; ++k) {
        if (k > 0) fact *= ExactScalar(k);
        expct[static_cast<size_t>(k)] = x.pow(k) / fact;   // e^{tx}
        expden[static_cast<size_t>(k)] = ExactScalar(1) / fact;  // e^t
    }
    auto etx = TruncatedSeries::from_coeffs(expct, 0, order);
    auto et = TruncatedSeries::from_coeffs(expden, 0, order);
    auto one = TruncatedSeries::monomial(ExactScalar(1), 0, order);
    // t e^{tx} / (e^t - 1)
    auto gen = etx.shifted(1) / (et - one);
    ExactScalar nf(1);
    for (int k = 1; k <= n; ++k) nf *= ExactScalar(k);
    return gen.coeff(n) * nf;
}
}  // namespace

TEST_CASE("Bernoulli polynomials match the generating-series oracle") {
    CHECK(bernoulli_polynomial(1, ExactScalar(0)) == ExactScalar(-1, 2));
    CHECK(bernoulli_polynomial(2, ExactScalar(0)) == ExactScalar(1, 6));
    CHECK(bernoulli_number(4) == ExactScalar(-1, 30));
    CHECK(bernoulli_number(12) == ExactScalar(-691, 2730));
    for (int n = 0; n <= 8; ++n)
        for (int num = -2; num <= 2; ++num) {
            ExactScalar x(num, 2);
            CHECK(bernoulli_polynomial(n, x) == bernoulli_poly_series_oracle(n, x));
        }
    // reflection B_n(x) = (-1)^n B_n(1-x)
    for (int n = 0; n <= 9; ++n) {
        ExactScalar x(3, 7);
        ExactScalar lhs = bernoulli_polynomial(n, x);
        ExactScalar rhs = bernoulli_polynomial(n, ExactScalar(1) - x);
        CHECK(lhs == (n % 2 == 0 ? rhs : -rhs));
    }
}

TEST_CASE("Bernoulli addition formula on a small grid") {
    for (int n = 0; n <= 12; ++n) {
        for (int xs = -1; xs <= 1; ++xs) {
            for (int ys = 1; ys <= 2; ++ys) {
                ExactScalar x(xs, 2), y(ys, 3);
                ExactScalar lhs = bernoulli_polynomial(n, x + y);
                ExactScalar rhs(0);
                for (int m = 0; m <= n; ++m)
                    rhs += ExactScalar(binomial(n, m)) * bernoulli_polynomial(m, x) *
                           y.pow(n - m);
                CHECK(lhs == rhs);
            }
        }
    }
}
