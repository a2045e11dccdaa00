#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "qdvol/combinatorics.hpp"
#include "qdvol/linalg.hpp"
#include "qdvol/polynomial.hpp"
#include "qdvol/rational.hpp"
#include "qdvol/spectral.hpp"

namespace qdvol {

/// Hodge-integral constants of one genus: kappa(g,i) (and theta(g,i)) with
/// their n-independent primed rescalings
///   kappa' = kappa / ((2g-3+i)! (4g-7+i)!!),
///   theta' = theta / ((2g-4+i)! (4g-8+i)!!).
struct HodgeConstants {
    int g = 0;
    std::vector<ExactScalar> kappa, kappa_prime;
    std::vector<ExactScalar> theta, theta_prime;
};

struct PqPolynomials {
    RationalPolynomial p, q;
    ExactScalar m_g;
};

struct RsPolynomials {
    RationalPolynomial r, s;
    ExactScalar n_g;
};

enum class AsymMode { volume, lplus };

struct AsymReport {
    AsymMode mode;
    int g = 0;
    int n = 0;
    ExactScalar coefficient;  // m_g for volumes, n_g/m_g for L+
    int epsilon = 0;          // parity of g
    double log_estimate = 0;  // natural log of the asymptotic estimate
    double ratio = 0;         // exact value / estimate
};

/// Volume, Siegel-Veech and Lyapunov analytics over the F-coefficients of
/// one (-1,2) recursion session.  Everything except the asymptotic
/// diagnostics is exact.
class Analytics {
  public:
    explicit Analytics(TrSession& tr) : tr_(tr) {
        if (!tr.curve().is_principal())
            throw domain_error("Analytics: requires the (-1,2) specialization");
    }

    TrSession& session() { return tr_; }

    /// s_{g,n} = 2^{2g-2+n} F_{g,n}[0,...,0]; n = 0 via the F_{g,0} value.
    ExactScalar segre_number(int g, int n) {
        if (n == 0) {
            if (g < 2) throw domain_error("segre_number: n = 0 needs g >= 2");
            return pow2(2 * g - 2) * tr_.f_g0(g);
        }
        if (g < 0 || 2 * g - 2 + n <= 0)
            throw domain_error("segre_number: unstable (g,n)");
        return pow2(2 * g - 2 + n) * tr_.f_zero(g, n);
    }

    /// Masur-Veech volume of Q_{g,4g-4+2n}(1^{4g-4+n}, -1^n), an exact
    /// positive rational multiple of pi^{6g-6+2n}.
    PiScalar volume_principal(int g, int n) {
        check_stratum(g, n);
        ExactScalar coeff;
        if (n == 0) {
            ExactScalar fsum = tr_.f_entry(g, 1, {1}) + tr_.f_entry(g, 1, {2});
            coeff = ExactScalar(3) * pow2(4 * g) * sign_pow(3 * g - 3) *
                    ExactScalar(factorial(4 * g - 4)) / ExactScalar(factorial(6 * g - 6)) * fsum;
        } else {
            coeff = pow2(4 * g - 1 + n) * sign_pow(3 * g - 3 + n) *
                    ExactScalar(factorial(4 * g - 4 + n)) /
                    ExactScalar(factorial(6 * g - 7 + 2 * n)) * tr_.f_zero(g, n);
        }
        if (coeff.sign() <= 0)
            throw inconsistency_error("volume_principal: nonpositive volume coefficient");
        return PiScalar(coeff, 6 * g - 6 + 2 * n);
    }

    /// vol(Q_{1,2n}(1^n,-1^n)) = pi^{2n} n!/(3(2n-1)!) ((2n-3)!! + (2n-2)!!).
    PiScalar volume_g1_closed(int n) {
        if (n < 2) throw domain_error("volume_g1_closed: needs n >= 2");
        ExactScalar coeff = ExactScalar(factorial(n)) /
                            (ExactScalar(3) * ExactScalar(factorial(2 * n - 1))) *
                            (double_factorial(2 * n - 3) + double_factorial(2 * n - 2));
        return PiScalar(coeff, 2 * n);
    }

    /// v(g,n) = vol / (2^n pi^{6g-6+2n}) * (6g-7+2n)! / ((2g-3+n)!(4g-4+n)!).
    ExactScalar v_norm(int g, int n) {
        PiScalar vol = volume_principal(g, n);
        return vol.coefficient() / pow2(n) * ExactScalar(factorial(6 * g - 7 + 2 * n)) /
               ExactScalar(factorial(2 * g - 3 + n)) / ExactScalar(factorial(4 * g - 4 + n));
    }

    /// Solves the (g+1)x(g+1) system
    ///   2^{2-4g} v(g,n) = sum_i kappa'(g,i) (a_{g,n}+i-1)!!/a_{g,n}!!,
    /// a_{g,n} = 4g-6+2n, over the fitting set n = 0..g.
    HodgeConstants kappa_prime_extract(int g) {
        if (g < 2) throw domain_error("kappa_prime_extract: needs g >= 2 "
                                      "(genus one is served by closed forms)");
        {
            std::lock_guard lk(mu_);
            auto it = kappa_.find(g);
            if (it != kappa_.end()) return it->second;
        }
        size_t dim = static_cast<size_t>(g) + 1;
        std::vector<std::vector<ExactScalar>> A(dim, std::vector<ExactScalar>(dim));
        std::vector<ExactScalar> rhs(dim);
        for (int n = 0; n <= g; ++n) {
            long a = 4L * g - 6 + 2 * n;
            for (int i = 0; i <= g; ++i)
                A[n][i] = double_factorial_ratio(a + i - 1, a);
            rhs[static_cast<size_t>(n)] = pow2(2 - 4 * g) * v_norm(g, n);
        }
        HodgeConstants out;
        out.g = g;
        out.kappa_prime = solve_fraction_free(std::move(A), std::move(rhs));
        for (int i = 0; i <= g; ++i) {
            ExactScalar k = out.kappa_prime[static_cast<size_t>(i)] *
                            ExactScalar(factorial(2 * g - 3 + i)) *
                            double_factorial(4 * g - 7 + i);
            if (k.sign() <= 0)
                throw inconsistency_error("kappa_prime_extract: nonpositive kappa(g,i)");
            out.kappa.push_back(k);
        }
        std::lock_guard lk(mu_);
        kappa_.emplace(g, out);
        return out;
    }

    /// p_g, q_g of the fixed-genus volume polynomial structure, plus m_g.
    PqPolynomials pq_polynomials(int g) {
        if (g == 1) {
            PqPolynomials out;
            out.p = RationalPolynomial::constant(ExactScalar(1, 6));
            out.q = out.p;
            out.m_g = ExactScalar(1, 3);
            return out;
        }
        HodgeConstants hc = kappa_prime_extract(g);
        PqPolynomials out;
        RationalPolynomial p, q;
        for (int i = 0; 2 * i + 1 <= g; ++i)
            p = p + rising_even_product(4 * g - 6, i).scaled(
                        hc.kappa_prime[static_cast<size_t>(2 * i + 1)]);
        for (int i = 0; 2 * i <= g; ++i)
            q = q + rising_even_product(4 * g - 7, i).scaled(
                        hc.kappa_prime[static_cast<size_t>(2 * i)]);
        out.p = p.scaled(pow2(4 * g - 2));
        out.q = q.scaled(pow2(4 * g - 2));
        if (out.p.degree() != (g - 1) / 2 || out.q.degree() != g / 2)
            throw inconsistency_error("pq_polynomials: degree mismatch with theory");
        out.m_g = (g % 2 == 0 ? out.q.leading() : out.p.leading()) / pow2(6 * g - 7);
        return out;
    }

    /// Volume through p_g(n) + gamma_{2g-3+n} q_g(n).
    PiScalar volume_via_pq(int g, int n) {
        if (g == 1 && n < 2) throw domain_error("volume_via_pq: empty stratum");
        if (g < 1 || n < 0) throw domain_error("volume_via_pq: needs g >= 1, n >= 0");
        PqPolynomials pq = pq_polynomials(g);
        ExactScalar value = pq.p(ExactScalar(n)) + gamma_k(2 * g - 3 + n) * pq.q(ExactScalar(n));
        ExactScalar coeff = pow2(n) * ExactScalar(factorial(2 * g - 3 + n)) *
                            ExactScalar(factorial(4 * g - 4 + n)) /
                            ExactScalar(factorial(6 * g - 7 + 2 * n)) * value;
        return PiScalar(coeff, 6 * g - 6 + 2 * n);
    }

    /// c_area by the boundary recursion of top Segre classes:
    ///   N = 1/2 s_{g-1,n+2} + 1/2 sum n!/(n1!n2!) s_{g1,n1+1} s_{g2,n2+1},
    /// with genus-zero pieces requiring at least two marked points, and
    ///   c_area = -(1/(2 pi^2)) N / s_{g,n}.
    PiScalar carea_principal(int g, int n) {
        check_stratum(g, n);
        ExactScalar N(0);
        if (g >= 1) N += ExactScalar(1, 2) * segre_number(g - 1, n + 2);
        for (int g1 = 0; g1 <= g; ++g1) {
            int g2 = g - g1;
            for (int n1 = 0; n1 <= n; ++n1) {
                int n2 = n - n1;
                if (g1 == 0 && n1 < 2) continue;
                if (g2 == 0 && n2 < 2) continue;
                ExactScalar ways(factorial(n));
                ways /= ExactScalar(factorial(n1)) * ExactScalar(factorial(n2));
                N += ExactScalar(1, 2) * ways * segre_number(g1, n1 + 1) *
                     segre_number(g2, n2 + 1);
            }
        }
        ExactScalar c = ExactScalar(-1, 2) * N / segre_number(g, n);
        if (c.sign() <= 0)
            throw inconsistency_error("carea_principal: nonpositive Siegel-Veech constant");
        return PiScalar(c, -2);
    }

    /// L+ from c_area through the Eskin-Kontsevich-Zorich relation
    /// L+ = (5g-5-n)/18 + (pi^2/3) c_area.
    ExactScalar lplus_principal(int g, int n) {
        PiScalar c = carea_principal(g, n);
        return ExactScalar(5 * g - 5 - n, 18) + c.coefficient() / ExactScalar(3);
    }

    /// Genus-one closed forms for (c_area, L+).
    std::pair<PiScalar, ExactScalar> carea_lplus_g1_closed(int n) {
        if (n < 2) throw domain_error("carea_lplus_g1_closed: needs n >= 2");
        ExactScalar ratio = double_factorial(2 * n - 2) / double_factorial(2 * n - 3);
        ExactScalar lplus = ExactScalar(2) / (ExactScalar(1) + ratio);
        ExactScalar c = ExactScalar(n, 6) + ExactScalar(6) / (ExactScalar(1) + ratio);
        return {PiScalar(c, -2), lplus};
    }

    /// u(g,n) = (-1)^{3g-4+n} 2^{4g-2}/(4g-8+2n)!! * Int s_{3g-4+n} lambda_1,
    /// the integral obtained from L+ as -L+ s_{g,n}/2.
    ExactScalar u_norm(int g, int n) {
        if (g < 2) throw domain_error("u_norm: needs g >= 2 "
                                      "(the theta base integrals do not exist in genus one)");
        ExactScalar integral = -lplus_principal(g, n) * segre_number(g, n) / ExactScalar(2);
        return sign_pow(3 * g - 4 + n) * pow2(4 * g - 2) /
               double_factorial(4 * g - 8 + 2 * n) * integral;
    }

    /// Solves 2^{2-4g} u(g,n) = sum_i theta'(g,i) (b_{g,n}+i)!!/b_{g,n}!!,
    /// b_{g,n} = 4g-8+2n, over n = 0..g.
    HodgeConstants theta_prime_extract(int g) {
        if (g < 2) throw domain_error("theta_prime_extract: needs g >= 2");
        {
            std::lock_guard lk(mu_);
            auto it = theta_.find(g);
            if (it != theta_.end()) return it->second;
        }
        size_t dim = static_cast<size_t>(g) + 1;
        std::vector<std::vector<ExactScalar>> A(dim, std::vector<ExactScalar>(dim));
        std::vector<ExactScalar> rhs(dim);
        for (int n = 0; n <= g; ++n) {
            long b = 4L * g - 8 + 2 * n;
            for (int i = 0; i <= g; ++i) A[n][i] = double_factorial_ratio(b + i, b);
            rhs[static_cast<size_t>(n)] = pow2(2 - 4 * g) * u_norm(g, n);
        }
        HodgeConstants out;
        out.g = g;
        out.theta_prime = solve_fraction_free(std::move(A), std::move(rhs));
        for (int i = 0; i <= g; ++i) {
            ExactScalar th = out.theta_prime[static_cast<size_t>(i)] *
                             ExactScalar(factorial(2 * g - 4 + i)) *
                             double_factorial(4 * g - 8 + i);
            if (th.sign() <= 0)
                throw inconsistency_error("theta_prime_extract: nonpositive theta(g,i)");
            out.theta.push_back(th);
        }
        std::lock_guard lk(mu_);
        theta_.emplace(g, out);
        return out;
    }

    /// r_g, s_g of the fixed-genus L+ structure, plus n_g.
    RsPolynomials rs_polynomials(int g) {
        if (g == 1) {
            // reference constants from the genus-one closed forms
            RsPolynomials out;
            out.r = RationalPolynomial();
            out.s = RationalPolynomial::linear(ExactScalar(-1, 3), ExactScalar(1, 3));
            out.n_g = ExactScalar(2, 3);
            return out;
        }
        HodgeConstants hc = theta_prime_extract(g);
        RationalPolynomial r, s;
        for (int i = 0; 2 * i <= g; ++i)
            r = r + rising_even_product(4 * g - 8, i).scaled(
                        hc.theta_prime[static_cast<size_t>(2 * i)]);
        for (int i = 0; 2 * i + 1 <= g; ++i)
            s = s + rising_even_product(4 * g - 7, i).scaled(
                        hc.theta_prime[static_cast<size_t>(2 * i + 1)]);
        RsPolynomials out;
        out.r = r.scaled(pow2(4 * g - 2));
        out.s = (s * RationalPolynomial::linear(ExactScalar(4 * g - 6), ExactScalar(2)))
                    .scaled(pow2(4 * g - 2));
        if (out.r.degree() != g / 2 || out.s.degree() != (g + 1) / 2)
            throw inconsistency_error("rs_polynomials: degree mismatch with theory");
        out.n_g = (g % 2 == 0 ? out.r.leading() : out.s.leading()) / pow2(6 * g - 7);
        return out;
    }

    /// L+ through (r_g(n) + gamma s_g(n)) / ((2g-3+n)(p_g(n) + gamma q_g(n))).
    ExactScalar lplus_via_rs(int g, int n) {
        if (g == 1 && n < 2) throw domain_error("lplus_via_rs: empty stratum");
        PqPolynomials pq = pq_polynomials(g);
        RsPolynomials rs = rs_polynomials(g);
        ExactScalar gamma = gamma_k(2 * g - 3 + n);
        ExactScalar num = rs.r(ExactScalar(n)) + gamma * rs.s(ExactScalar(n));
        ExactScalar den = ExactScalar(2 * g - 3 + n) *
                          (pq.p(ExactScalar(n)) + gamma * pq.q(ExactScalar(n)));
        return num / den;
    }

    /// Floating asymptotic diagnostics; the exact constants remain in the
    /// report.  Volumes use the closed form (g = 1) or the pq route, so
    /// large n stays cheap.
    AsymReport asymptotics(int g, int n, AsymMode mode) {
        if (n < 1) throw domain_error("asymptotics: needs n >= 1");
        AsymReport rep;
        rep.mode = mode;
        rep.g = g;
        rep.n = n;
        rep.epsilon = g % 2;
        PqPolynomials pq = pq_polynomials(g);
        if (mode == AsymMode::volume) {
            if (g == 1 && n < 2) throw domain_error("asymptotics: empty stratum");
            rep.coefficient = pq.m_g;
            PiScalar vol = (g == 1) ? volume_g1_closed(n) : volume_via_pq(g, n);
            // vol / asym = [coeff 2^n / (m_g n^{floor(g/2)})] / (pi n)^{eps/2}
            ExactScalar exact_part = vol.coefficient() * pow2(n) / pq.m_g /
                                     ExactScalar(Int(n)).pow(g / 2);
            rep.ratio = exact_part.to_double() /
                        std::pow(kPi * n, rep.epsilon / 2.0);
            rep.log_estimate = -n * std::log(2.0) +
                               (6.0 * g - 6 + 2 * n + rep.epsilon / 2.0) * std::log(kPi) +
                               std::log(pq.m_g.to_double()) + (g / 2.0) * std::log(n);
        } else {
            RsPolynomials rs = rs_polynomials(g);
            rep.coefficient = rs.n_g / pq.m_g;
            ExactScalar lp = (g == 1) ? carea_lplus_g1_closed(n).second : lplus_via_rs(g, n);
            double estimate = std::pow(kPi, 0.5 - rep.epsilon) *
                              rep.coefficient.to_double() / std::sqrt(double(n));
            rep.log_estimate = std::log(estimate);
            rep.ratio = lp.to_double() / estimate;
        }
        return rep;
    }

  private:
    static constexpr double kPi = 3.14159265358979323846;

    static ExactScalar pow2(long e) { return ExactScalar(2).pow(e); }
    static ExactScalar sign_pow(long e) { return ExactScalar((e % 2 + 2) % 2 == 0 ? 1 : -1); }

    /// prod_{j=1}^{i} (base + 2n + 2j) as a polynomial in n (degree i).
    static RationalPolynomial rising_even_product(long base, int i) {
        RationalPolynomial out = RationalPolynomial::constant(ExactScalar(1));
        for (int j = 1; j <= i; ++j)
            out = out * RationalPolynomial::linear(ExactScalar(base + 2 * j), ExactScalar(2));
        return out;
    }

    void check_stratum(int g, int n) const {
        if (g < 0 || n < 0) throw domain_error("invalid stratum: negative genus or pole count");
        if (g == 1 && n <= 1)
            throw domain_error("empty stratum: Q_{1," + std::to_string(2 * n) +
                               "}(1^" + std::to_string(n) + ",-1^" + std::to_string(n) +
                               ") has no quadratic differentials");
        if (4 * g - 4 + n < 0)
            throw domain_error("invalid stratum: 4g-4+n < 0");
        if (n == 0 && g < 2)
            throw domain_error("invalid stratum: n = 0 needs g >= 2");
    }

    TrSession& tr_;
    std::mutex mu_;
    std::map<int, HodgeConstants> kappa_, theta_;
};

}  // namespace qdvol
