#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "qdvol/laurent.hpp"
#include "qdvol/series.hpp"

using namespace qdvol;

namespace {

TruncatedSeries geometric(int order) {
    // 1/(1-t)
    auto one = TruncatedSeries::monomial(ExactScalar(1), 0, order);
    auto t = TruncatedSeries::monomial(ExactScalar(1), 1, order);
    return one / (one - t);
}

TruncatedSeries random_series(std::mt19937& rng, int lo, int order) {
    std::uniform_int_distribution<int> num(-4, 4);
    std::uniform_int_distribution<int> den(1, 4);
    std::vector<ExactScalar> c;
    for (int e = lo; e < order; ++e) c.emplace_back(num(rng), den(rng));
    return TruncatedSeries::from_coeffs(std::move(c), lo, order);
}

}  // namespace

TEST_CASE("series basics and truncation accounting") {
    auto g = geometric(8);
    for (int e = 0; e < 8; ++e) CHECK(g.coeff(e) == ExactScalar(1));
    CHECK_THROWS_AS(g.coeff(8), truncation_error);
    CHECK(g.coeff(-5) == ExactScalar(0));  // below the window is known zero

    auto z = TruncatedSeries::zero(5);
    CHECK(z.known_zero());
    CHECK((z + g).order() == 5);

    // multiplication tightens the order by the partner's valuation
    auto t2 = TruncatedSeries::monomial(ExactScalar(1), 2, 10);
    CHECK(mul(g, t2).order() == 10);
    CHECK(mul(g, t2).coeff(5) == ExactScalar(1));
}

TEST_CASE("sqrt of a perfect square") {
    // 1 + 2t + t^2
    auto s = TruncatedSeries::from_coeffs({ExactScalar(1), ExactScalar(2), ExactScalar(1)}, 0, 9);
    auto r = s.sqrt();
    CHECK(r.coeff(0) == ExactScalar(1));
    CHECK(r.coeff(1) == ExactScalar(1));
    for (int e = 2; e < 8; ++e) CHECK(r.coeff(e) == ExactScalar(0));
    CHECK_THROWS_AS(TruncatedSeries::monomial(ExactScalar(2), 0, 6).sqrt(), domain_error);
    CHECK_THROWS_AS(TruncatedSeries::monomial(ExactScalar(1), 1, 6).sqrt(), domain_error);
}

TEST_CASE("log inverts exp termwise") {
    // 1 + t + t^2/2 + t^3/6 + t^4/24 ...
    int order = 10;
    std::vector<ExactScalar> c;
    ExactScalar f(1);
    for (int k = 0; k < order; ++k) {
        if (k > 0) f *= ExactScalar(k);
        c.push_back(ExactScalar(1) / f);
    }
    auto e = TruncatedSeries::from_coeffs(std::move(c), 0, order);
    auto l = e.log();
    CHECK(l.coeff(1) == ExactScalar(1));
    for (int k = 2; k < order - 1; ++k) CHECK(l.coeff(k) == ExactScalar(0));

    auto t = TruncatedSeries::monomial(ExactScalar(1), 1, order);
    auto back = (t + t.pow(2).scaled(ExactScalar(1, 3))).exp().log();
    CHECK(back.coeff(1) == ExactScalar(1));
    CHECK(back.coeff(2) == ExactScalar(1, 3));
    CHECK(back.coeff(3) == ExactScalar(0));

    CHECK_THROWS_AS(t.log(), domain_error);
}

TEST_CASE("reversion by Lagrange inversion") {
    int order = 9;
    auto t = TruncatedSeries::monomial(ExactScalar(1), 1, order);
    CHECK(t.reversion().coeff(1) == ExactScalar(1));

    auto a = t + t.pow(2);
    auto b = a.reversion();
    // reversion(t + t^2) = t - t^2 + 2t^3 - 5t^4 + 14t^5 ... (signed Catalan)
    CHECK(b.coeff(1) == ExactScalar(1));
    CHECK(b.coeff(2) == ExactScalar(-1));
    CHECK(b.coeff(3) == ExactScalar(2));
    CHECK(b.coeff(4) == ExactScalar(-5));
    CHECK(b.coeff(5) == ExactScalar(14));

    // defining property on a random admissible series
    std::mt19937 rng(7);
    for (int trial = 0; trial < 5; ++trial) {
        auto f = TruncatedSeries::monomial(ExactScalar(1), 1, order) +
                 random_series(rng, 2, order);
        auto inv = f.reversion();
        auto comp = compose(f, inv);
        CHECK(comp.coeff(1) == ExactScalar(1));
        for (int e = 2; e < comp.order(); ++e) CHECK(comp.coeff(e) == ExactScalar(0));
    }

    CHECK_THROWS_AS(TruncatedSeries::monomial(ExactScalar(1), 2, 6).reversion(), domain_error);
}

TEST_CASE("residue extraction") {
    // 2 t^-3 + 5 t^-1 + 7
    auto f = TruncatedSeries::from_coeffs(
        {ExactScalar(2), ExactScalar(0), ExactScalar(5), ExactScalar(7)}, -3, 4);
    CHECK(f.residue() == ExactScalar(5));
    CHECK(TruncatedSeries::monomial(ExactScalar(1), -2, 3).residue() == ExactScalar(0));
    CHECK_THROWS_AS(TruncatedSeries::zero(-1).residue(), truncation_error);

    // residues of derivatives vanish
    std::mt19937 rng(11);
    for (int trial = 0; trial < 8; ++trial) {
        auto g = random_series(rng, -4, 5);
        CHECK(g.derivative().residue() == ExactScalar(0));
        CHECK((g + g.derivative()).residue() == g.residue());
    }
}

TEST_CASE("ring laws on random truncated series") {
    std::mt19937 rng(23);
    for (int trial = 0; trial < 12; ++trial) {
        auto a = random_series(rng, 0, 12);
        auto b = random_series(rng, 0, 12);
        auto c = random_series(rng, 0, 12);
        CHECK(a * b == b * a);
        CHECK((a * b) * c == a * (b * c));
        CHECK(a * (b + c) == a * b + a * c);
    }
}

TEST_CASE("chain rule through compose") {
    std::mt19937 rng(5);
    for (int trial = 0; trial < 6; ++trial) {
        auto f = random_series(rng, 0, 10);
        auto g = TruncatedSeries::monomial(ExactScalar(1), 1, 10) + random_series(rng, 2, 10);
        auto lhs = compose(f, g).derivative();
        auto rhs = mul(compose(f.derivative(), g), g.derivative());
        for (int e = std::max(lhs.valuation(), rhs.valuation());
             e < std::min(lhs.order(), rhs.order()); ++e)
            CHECK(lhs.coeff(e) == rhs.coeff(e));
    }
}

TEST_CASE("division needs a nonzero divisor; compose needs positive valuation") {
    auto t = TruncatedSeries::monomial(ExactScalar(1), 1, 6);
    CHECK_THROWS_AS(t.inverse() * TruncatedSeries::zero(4).inverse(), domain_error);
    auto unit = TruncatedSeries::monomial(ExactScalar(1), 0, 6);
    CHECK_THROWS_AS(compose(t, unit), domain_error);
}

TEST_CASE("Laurent polynomial arithmetic") {
    LaurentPoly p = LaurentPoly::monomial(ExactScalar(1), -2);
    LaurentPoly mult;
    mult.add_term(-1, ExactScalar(1));
    mult.add_term(0, ExactScalar(-1));
    LaurentPoly x1 = -(p * mult).derivative();
    CHECK(x1.coeff(-3) == ExactScalar(-2));
    CHECK(x1.coeff(-4) == ExactScalar(3));
    CHECK(x1.top_pole_order() == 4);
    CHECK_THROWS_AS(LaurentPoly::monomial(ExactScalar(1), 1), domain_error);
    CHECK((p - p).is_zero());
    auto s = x1.to_series(2);
    CHECK(s.coeff(-4) == ExactScalar(3));
    CHECK(s.coeff(0) == ExactScalar(0));
}
