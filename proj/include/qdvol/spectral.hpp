#pragma once

#include <atomic>
#include <chrono>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <shared_mutex>
#include <tuple>
#include <utility>
#include <vector>

#include "qdvol/amplitude.hpp"
#include "qdvol/combinatorics.hpp"
#include "qdvol/laurent.hpp"
#include "qdvol/rational.hpp"
#include "qdvol/series.hpp"

namespace qdvol {

/// Spectral curve x(z) = -z + a ln z, y(z) = z^b of the family S[a,b].
/// The quadratic Hodge bundle Segre numbers live at (a,b) = (-1,2).
struct CurveParams {
    ExactScalar a;
    int b;

    CurveParams(ExactScalar a_, int b_) : a(std::move(a_)), b(b_) {
        if (a.is_zero()) throw domain_error("CurveParams: a must be nonzero");
        if (b == 0) throw domain_error("CurveParams: b must be nonzero");
    }

    static CurveParams principal() { return CurveParams(ExactScalar(-1), 2); }
    bool is_principal() const { return a == ExactScalar(-1) && b == 2; }

    std::string str() const { return "[" + a.str() + "," + std::to_string(b) + "]"; }
};

/// x(a+t) - x(a) = -t + a ln(1 + t/a), a series of valuation 2 with
/// coefficient (-1)^{k+1} a^{1-k} / k at t^k for k >= 2.
inline TruncatedSeries x_local_series(const CurveParams& curve, int order) {
    if (order < 3) throw domain_error("x_local_series: order must be >= 3");
    std::vector<ExactScalar> c(static_cast<size_t>(order), ExactScalar(0));
    ExactScalar apow(1);  // a^{k-1}
    for (int k = 2; k < order; ++k) {
        apow *= curve.a;
        c[static_cast<size_t>(k)] = ExactScalar((k % 2 == 0) ? -1 : 1, k) / apow;
    }
    return TruncatedSeries::from_coeffs(std::move(c), 0, order);
}

/// The unique solution of t + ln(1-t) = s + ln(1-s) with s = -t + O(t^2),
/// obtained as zeta^{-1}(-zeta(t)) for zeta = sqrt(2(x(-1+t) - x(-1))).
inline TruncatedSeries sigma_hat_series(int order) {
    if (order < 2) throw domain_error("sigma_hat_series: order must be >= 2");
    TruncatedSeries x = x_local_series(CurveParams::principal(), order + 2);
    TruncatedSeries zeta = x.scaled(ExactScalar(2)).sqrt();
    TruncatedSeries inv = zeta.reversion();
    return compose(inv, -zeta).truncated(order);
}

/// Xi_k(t) at (a,b) = (-1,2): Xi_0 = 1/t^2 and
/// Xi_k = -d/dt ( Xi_{k-1} (1-t)/t ).  Poles span orders k+2 .. 2k+2 with
/// top coefficient (2k+1)!!.
inline const LaurentPoly& xi_basis(int k) {
    if (k < 0) throw domain_error("xi_basis: negative index");
    static std::vector<LaurentPoly> table;
    static std::mutex mu;
    std::lock_guard lk(mu);
    if (table.empty()) table.push_back(LaurentPoly::monomial(ExactScalar(1), -2));
    LaurentPoly mult;  // (1-t)/t = t^{-1} - 1
    mult.add_term(-1, ExactScalar(1));
    mult.add_term(0, ExactScalar(-1));
    while (static_cast<int>(table.size()) <= k)
        table.push_back(-(table.back() * mult).derivative());
    return table[static_cast<size_t>(k)];
}

/// Greedy decomposition of a pole-only Laurent polynomial on the Xi basis,
/// peeling from the highest pole order.  An odd top order or a nonzero
/// final remainder is a hard error.
inline std::map<int, ExactScalar> xi_decompose(LaurentPoly p) {
    std::map<int, ExactScalar> out;
    while (!p.is_zero()) {
        int top = p.top_pole_order();
        if (top < 2 || top % 2 != 0)
            throw inconsistency_error("xi_decompose: top pole order " + std::to_string(top) +
                                      " not of the form 2k+2");
        int k = (top - 2) / 2;
        ExactScalar c = p.coeff(-top) / double_factorial(2 * k + 1);
        p = p - xi_basis(k).scaled(c);
        if (p.top_pole_order() >= top)
            throw inconsistency_error("xi_decompose: peel did not reduce the pole order");
        out.emplace(k, c);
    }
    return out;
}

/// t_d / r_d coefficient data of the Laplace-transform series T(u), R(u).
/// The constant of T is not rational in general; its square
/// T(0)^2 = -b^2 a^{2b-1} is, and is what the two routes compare.
struct TrCoefficients {
    std::vector<ExactScalar> t;  // index d = 1..d_max (slot 0 unused)
    std::vector<ExactScalar> r;
    ExactScalar t0_square;
};

/// Closed Bernoulli formulas: t_d = (-1)^{d+1} B_{d+1}(1-b) / (d(d+1)a^d),
/// r_d = -B_{d+1} / (d(d+1)a^d).
inline TrCoefficients tr_coefficients_closed(const CurveParams& curve, int d_max) {
    if (d_max < 1) throw domain_error("tr_coefficients_closed: d_max must be >= 1");
    TrCoefficients out;
    out.t.assign(static_cast<size_t>(d_max) + 1, ExactScalar(0));
    out.r.assign(static_cast<size_t>(d_max) + 1, ExactScalar(0));
    ExactScalar apow(1);
    for (int d = 1; d <= d_max; ++d) {
        apow *= curve.a;
        ExactScalar dd = ExactScalar(d) * ExactScalar(d + 1) * apow;
        ExactScalar bp = bernoulli_polynomial(d + 1, ExactScalar(1 - curve.b));
        out.t[static_cast<size_t>(d)] = (d % 2 == 0 ? -bp : bp) / dd;
        out.r[static_cast<size_t>(d)] = -bernoulli_number(d + 1) / dd;
    }
    out.t0_square = -ExactScalar(curve.b) * ExactScalar(curve.b) * curve.a.pow(2 * curve.b - 1);
    return out;
}

/// Local-expansion route: y and xi_0 expanded in the coordinate
/// zeta = sqrt(2(x - x(a))), then T(u) = -sum (2d+1)!! y_{2d+1} u^d and
/// R(u) = 1 + sum (2d-1)!! xi_{0,2d} u^{d+1}, with t_d, r_d read off the
/// logarithms.  Requires -1/a to be a rational perfect square.
inline TrCoefficients tr_coefficients_local(const CurveParams& curve, int d_max) {
    if (d_max < 1) throw domain_error("tr_coefficients_local: d_max must be >= 1");
    auto s = (-curve.a.reciprocal()).sqrt();
    if (!s || s->is_zero())
        throw domain_error("tr_coefficients_local: -1/a is not a rational square");

    int order = 2 * d_max + 6;
    TruncatedSeries x = x_local_series(curve, order + 2);
    TruncatedSeries zeta = x.scaled(ExactScalar(2)).sqrt();
    TruncatedSeries t_of_zeta = zeta.reversion();

    // y(a + t(zeta)) = (a + t(zeta))^b
    TruncatedSeries a_plus_t = t_of_zeta + TruncatedSeries::monomial(curve.a, 0, order + 1);
    TruncatedSeries y = a_plus_t.pow(curve.b);

    TrCoefficients out;
    out.t.assign(static_cast<size_t>(d_max) + 1, ExactScalar(0));
    out.r.assign(static_cast<size_t>(d_max) + 1, ExactScalar(0));

    std::vector<ExactScalar> tc(static_cast<size_t>(d_max) + 1, ExactScalar(0));
    for (int d = 0; d <= d_max; ++d)
        tc[static_cast<size_t>(d)] =
            -(double_factorial(2 * d + 1) * y.coeff(2 * d + 1));
    TruncatedSeries Tu = TruncatedSeries::from_coeffs(tc, 0, d_max + 1);
    ExactScalar T0 = Tu.coeff(0);
    if (T0.is_zero()) throw inconsistency_error("tr_coefficients_local: vanishing T(0)");
    out.t0_square = T0 * T0;
    TruncatedSeries tlog = -(Tu.scaled(T0.reciprocal()).log());
    for (int d = 1; d <= d_max; ++d) out.t[static_cast<size_t>(d)] = tlog.coeff(d);

    // xi_0 = (1/s) dt/t^2 re-expanded in zeta: must start exactly at 1/zeta^2
    // and carry no residue term.
    TruncatedSeries xi0 =
        mul(t_of_zeta.derivative(), t_of_zeta.pow(-2)).scaled(s->reciprocal());
    if (xi0.coeff(-2) != ExactScalar(1) || !xi0.coeff(-1).is_zero())
        throw inconsistency_error("tr_coefficients_local: xi_0 normalization failed");
    std::vector<ExactScalar> rc(static_cast<size_t>(d_max) + 1, ExactScalar(0));
    rc[0] = ExactScalar(1);
    for (int d = 0; d + 1 <= d_max; ++d)
        rc[static_cast<size_t>(d) + 1] = double_factorial(2 * d - 1) * xi0.coeff(2 * d);
    TruncatedSeries Ru = TruncatedSeries::from_coeffs(rc, 0, d_max + 1);
    TruncatedSeries rlog = Ru.log();
    for (int d = 1; d <= d_max; ++d) out.r[static_cast<size_t>(d)] = rlog.coeff(d);
    return out;
}

/// Coefficient rescaling of the family relation
/// omega^{[a,b]}_{g,n}(z) = (-a)^{(b+1)(2-2g-n)} omega^{[-1,b]}_{g,n}(-z/a):
/// W^{[a,b]}[e] = (-a)^{(b+1)(2-2g-n) - n - sum(e)} W^{[-1,b]}[e].
inline ExactScalar family_scaling_factor(const CurveParams& curve, int g, int n,
                                         const ExpKey& exponents) {
    long total = 0;
    for (int e : exponents) total += e;
    long power = static_cast<long>(curve.b + 1) * (2 - 2 * g - n) - n - total;
    return (-curve.a).pow(power);
}

/// Memoized topological-recursion engine for one spectral curve.
///
/// Amplitudes W_{g,n} are stored on sorted exponent multisets; a "slice"
/// keeps only the first `free` variables symbolic and pins every other
/// variable to exponent -2 (the coefficient the volume formulas consume),
/// which keeps deep F[0,...,0] evaluations cheap.  Concurrent lookups share
/// one computation per key.
class TrSession {
  public:
    explicit TrSession(CurveParams curve = CurveParams::principal(), int truncation_margin = 0)
        : curve_(std::move(curve)), margin_(truncation_margin) {
        if (truncation_margin < 0) throw domain_error("TrSession: negative truncation margin");
    }

    const CurveParams& curve() const { return curve_; }

    int working_order(int g, int n) const { return 2 * (3 * g - 2 + n) + 6 + margin_; }

    /// sigma(t) = -a sigma_hat(-t/a); x(a + sigma(t)) = x(a + t) is verified
    /// to the working order whenever the series is extended.
    TruncatedSeries sigma(int order) {
        std::lock_guard lk(series_mu_);
        ensure_sigma(order);
        return sigma_.truncated(order);
    }

    const Amplitude& amplitude(int g, int n) { return slice(g, n, n); }

    /// W_{g,n} with variables free..n pinned at exponent -2.
    const Amplitude& slice(int g, int n, int free) {
        if (2 * g - 2 + n <= 0 || n < 1)
            throw domain_error("tr_amplitude: (g,n) is not stable");
        if (free < 1 || free > n) throw domain_error("slice: free count out of range");
        return slice_future(g, n, free).get()->value;
    }

    ExactScalar f_zero(int g, int n) {
        if (2 * g - 2 + n <= 0 || n < 1)
            throw domain_error("f_zero: (g,n) is not stable");
        std::vector<int> zeros(static_cast<size_t>(n), 0);
        {
            std::shared_lock lk(f_mu_);
            auto it = f_entries_.find({g, n, zeros});
            if (it != f_entries_.end()) return it->second;
        }
        ExactScalar v = slice(g, n, 1).coefficient({-2});
        record_entry(g, n, zeros, v);
        return v;
    }

    /// Full decomposition of W_{g,n} on products Xi_{k_1} ... Xi_{k_n};
    /// only defined at the (-1,2) specialization.
    const FTable& f_table(int g, int n) {
        if (!curve_.is_principal())
            throw domain_error("f_table: basis decomposition is restricted to (a,b)=(-1,2)");
        if (2 * g - 2 + n <= 0 || n < 1)
            throw domain_error("f_table: (g,n) is not stable");
        {
            std::shared_lock lk(f_mu_);
            auto it = tables_.find({g, n});
            if (it != tables_.end()) return it->second;
        }
        const Amplitude& W = amplitude(g, n);
        FTable table;
        table.g = g;
        table.n = n;
        std::vector<int> prefix;
        decompose_rec(W.terms(), n, prefix, table);
        ExactScalar direct = f_zero(g, n);
        if (table.zero_entry() != direct)
            throw inconsistency_error("f_table: zero entry disagrees with the residue slice");
        std::unique_lock lk(f_mu_);
        auto [it, inserted] = tables_.emplace(std::make_pair(g, n), std::move(table));
        if (inserted) {
            for (const auto& [k, v] : it->second.entries) {
                f_entries_[{g, n, k}] = v;
                new_entries_.push_back({g, n, k, v});
            }
        }
        return it->second;
    }

    /// Single table coefficient, cache-aware: entries preloaded from disk
    /// answer without recursion.
    ExactScalar f_entry(int g, int n, std::vector<int> k) {
        if (static_cast<int>(k.size()) != n) throw domain_error("f_entry: arity mismatch");
        k = FTable::canonical(std::move(k));
        long total = 0;
        for (int x : k) {
            if (x < 0) throw domain_error("f_entry: negative index");
            total += x;
        }
        if (total > 3L * g - 3 + n) return ExactScalar(0);
        {
            std::shared_lock lk(f_mu_);
            auto it = f_entries_.find({g, n, k});
            if (it != f_entries_.end()) return it->second;
            auto tb = tables_.find({g, n});
            if (tb != tables_.end()) return tb->second.at(k);
        }
        return f_table(g, n).at(k);
    }

    /// F_{g,0} = (F_{g,1}[1] + F_{g,1}[2]) / (g-1).
    ExactScalar f_g0(int g) {
        if (g < 2) throw domain_error("f_g0: needs g >= 2");
        std::vector<int> empty;
        {
            std::shared_lock lk(f_mu_);
            auto it = f_entries_.find({g, 0, empty});
            if (it != f_entries_.end()) return it->second;
        }
        ExactScalar v = (f_entry(g, 1, {1}) + f_entry(g, 1, {2})) / ExactScalar(g - 1);
        record_entry(g, 0, empty, v);
        return v;
    }

    /// F_{g,0} by the n=0 residue formula: the primitive of y dx against
    /// W_{g,1}, divided by 2-2g.  An independent route to f_g0.
    ExactScalar f_g0_residue(int g) {
        if (g < 2) throw domain_error("f_g0_residue: needs g >= 2");
        const Amplitude& W = amplitude(g, 1);
        int order = working_order(g, 1);
        // primitive of y(a+s) x'(a+s) = -s (a+s)^{b-1} from 0 to t
        TruncatedSeries a_plus_t =
            TruncatedSeries::monomial(curve_.a, 0, order) +
            TruncatedSeries::monomial(ExactScalar(1), 1, order);
        TruncatedSeries integrand =
            mul(TruncatedSeries::monomial(ExactScalar(-1), 1, order), a_plus_t.pow(curve_.b - 1));
        TruncatedSeries primitive = integrand.antiderivative();
        ExactScalar acc(0);
        for (const auto& [key, c] : W.terms()) {
            int e = key.front();  // arity 1
            // residue of primitive * t^e
            if (-1 - e < primitive.order()) acc += c * primitive.coeff(-1 - e);
        }
        return acc / ExactScalar(2 - 2 * g);
    }

    /// Recursion kernel expansion K(t1,t) = sum_j K_j(t1) t^j, trusted for
    /// j = -1 .. max_j.
    struct KernelTable {
        int max_j = -2;
        std::vector<LaurentPoly> K;  // K[j+1] = K_j
        const LaurentPoly& at(int j) const {
            if (j < -1 || j > max_j)
                throw truncation_error("kernel coefficient K_" + std::to_string(j) +
                                       " beyond trusted order");
            return K[static_cast<size_t>(j + 1)];
        }
    };

    KernelTable kernel(int order) {
        std::lock_guard lk(series_mu_);
        ensure_kernel(order);
        return kernel_;
    }

    long amplitudes_computed() const { return computed_.load(); }

    /// Preload one F entry (cache load path; no dirty mark).
    void preload_entry(int g, int n, std::vector<int> k, const ExactScalar& v) {
        std::unique_lock lk(f_mu_);
        f_entries_[{g, n, FTable::canonical(std::move(k))}] = v;
    }

    struct NewEntry {
        int g;
        int n;
        std::vector<int> k;
        ExactScalar value;
    };

    std::vector<NewEntry> snapshot_new_entries() const {
        std::shared_lock lk(f_mu_);
        return new_entries_;
    }

    std::vector<NewEntry> snapshot_all_entries() const {
        std::shared_lock lk(f_mu_);
        std::vector<NewEntry> out;
        out.reserve(f_entries_.size());
        for (const auto& [key, v] : f_entries_)
            out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), v});
        return out;
    }

  private:
    struct Slot {
        Amplitude value{0};
    };
    using SlotPtr = std::shared_ptr<Slot>;

    std::shared_future<SlotPtr> slice_future(int g, int n, int free) {
        std::tuple<int, int, int> key{g, n, free};
        {
            std::unique_lock lk(amp_mu_);
            auto it = amp_futures_.find(key);
            if (it != amp_futures_.end()) return it->second;
            // a fuller slice can serve a thinner one without recomputing
            for (int k2 = n; k2 > free; --k2) {
                auto it2 = amp_futures_.find({g, n, k2});
                if (it2 == amp_futures_.end()) continue;
                if (it2->second.wait_for(std::chrono::seconds(0)) != std::future_status::ready)
                    continue;
                auto slot = std::make_shared<Slot>();
                slot->value = derive_slice(it2->second.get()->value, free);
                std::promise<SlotPtr> pr;
                pr.set_value(slot);
                auto fut = pr.get_future().share();
                amp_futures_.emplace(key, fut);
                return fut;
            }
            std::promise<SlotPtr> pr;
            auto fut = pr.get_future().share();
            amp_futures_.emplace(key, fut);
            lk.unlock();
            try {
                auto slot = std::make_shared<Slot>();
                slot->value = compute_slice(g, n, free);
                pr.set_value(slot);
            } catch (...) {
                pr.set_exception(std::current_exception());
            }
            return fut;
        }
    }

    static Amplitude derive_slice(const Amplitude& src, int free) {
        int drop = src.arity() - free;
        Amplitude out(free);
        for (const auto& [key, c] : src.terms()) {
            int c2 = static_cast<int>(std::count(key.begin(), key.end(), -2));
            if (c2 < drop) continue;
            ExpKey rest;
            rest.reserve(key.size() - static_cast<size_t>(drop));
            int removed = 0;
            for (int e : key) {
                if (e == -2 && removed < drop) {
                    ++removed;
                    continue;
                }
                rest.push_back(e);
            }
            out.set_checked(rest, c);
        }
        return out;
    }

    // --- series-level state -------------------------------------------------

    void ensure_sigma(int order) {
        if (sigma_order_ >= order) return;
        TruncatedSeries base = sigma_hat_series(order);
        if (curve_.is_principal()) {
            sigma_ = base;
        } else {
            // sigma(t) = -a sigma_hat(-t/a)
            std::vector<ExactScalar> c(static_cast<size_t>(order), ExactScalar(0));
            ExactScalar scale(1);  // (-1/a)^k
            for (int k = 1; k < order; ++k) {
                scale = scale * (-curve_.a.reciprocal());
                c[static_cast<size_t>(k)] = -curve_.a * scale * base.coeff(k);
            }
            sigma_ = TruncatedSeries::from_coeffs(std::move(c), 0, order);
            // x-invariance: x(a + sigma(t)) = x(a + t)
            TruncatedSeries x = x_local_series(curve_, order);
            TruncatedSeries diff = compose(x, sigma_) - x;
            if (!diff.known_zero())
                throw inconsistency_error("sigma: x-invariance failed for curve " + curve_.str());
        }
        sigma_order_ = order;
    }

    void ensure_kernel(int order) {
        if (kernel_order_ >= order) return;
        ensure_sigma(order);
        const TruncatedSeries sig = sigma_.truncated(order);
        int M = order;

        TruncatedSeries t_mono = TruncatedSeries::monomial(ExactScalar(1), 1, M + 2);
        TruncatedSeries a_plus_t = t_mono + TruncatedSeries::monomial(curve_.a, 0, M + 2);
        TruncatedSeries a_plus_sig = sig + TruncatedSeries::monomial(curve_.a, 0, M);
        TruncatedSeries y_t = a_plus_t.pow(curve_.b);
        TruncatedSeries y_sig = a_plus_sig.pow(curve_.b);
        TruncatedSeries xprime = mul(-t_mono, a_plus_t.inverse());

        TruncatedSeries numer = mul(sig.derivative(), (t_mono - sig)).scaled(ExactScalar(1, 2));
        TruncatedSeries denom = mul(y_t - y_sig, xprime);
        TruncatedSeries P = numer / denom;  // valuation -1

        // powers of sigma for the double geometric sum in t1
        std::vector<TruncatedSeries> spow;
        spow.push_back(TruncatedSeries::monomial(ExactScalar(1), 0, M));
        while (static_cast<int>(spow.size()) < M)
            spow.push_back(mul(spow.back(), sig, M));

        // G[r] = [t^r] 1/((t1-t)(t1-sigma(t))), a Laurent polynomial in t1
        std::vector<LaurentPoly> G(static_cast<size_t>(M));
        for (int l = 0; l < M; ++l) {
            const TruncatedSeries& sl = spow[static_cast<size_t>(l)];
            if (sl.known_zero()) break;
            for (int e = sl.valuation(); e < std::min(sl.order(), M); ++e) {
                const ExactScalar& c = sl.coeff(e);
                if (c.is_zero()) continue;
                for (int m = 0; m + e < M; ++m)
                    G[static_cast<size_t>(m + e)].add_term(-(m + l + 2), c);
            }
        }

        KernelTable table;
        table.max_j = std::min(P.order(), M) - 2;
        table.K.assign(static_cast<size_t>(table.max_j + 2), LaurentPoly());
        for (int j = -1; j <= table.max_j; ++j) {
            LaurentPoly acc;
            for (int p = P.valuation(); p < P.order() && p <= j; ++p) {
                const ExactScalar& pc = P.coeff(p);
                if (pc.is_zero()) continue;
                acc = acc + G[static_cast<size_t>(j - p)].scaled(pc);
            }
            table.K[static_cast<size_t>(j + 1)] = std::move(acc);
        }
        kernel_ = std::move(table);
        kernel_order_ = order;
    }

    // --- the recursion -------------------------------------------------------

    struct SigmaPowers {
        const TruncatedSeries& sig;
        int cap;
        std::vector<TruncatedSeries> pos, neg;
        SigmaPowers(const TruncatedSeries& s, int cap_) : sig(s), cap(cap_) {
            pos.push_back(TruncatedSeries::monomial(ExactScalar(1), 0, cap));
            neg.push_back(pos.front());
            inv = sig.inverse();
        }
        const TruncatedSeries& power(int e) {
            if (e >= 0) {
                while (static_cast<int>(pos.size()) <= e) pos.push_back(mul(pos.back(), sig, cap));
                return pos[static_cast<size_t>(e)];
            }
            while (static_cast<int>(neg.size()) <= -e) neg.push_back(mul(neg.back(), inv));
            return neg[static_cast<size_t>(-e)];
        }
        TruncatedSeries inv;
    };

    using SeriesMap = std::map<ExpKey, TruncatedSeries>;

    static void series_map_add(SeriesMap& m, const ExpKey& key, const TruncatedSeries& s) {
        if (s.known_zero()) return;
        auto [it, inserted] = m.emplace(key, s);
        if (!inserted) it->second = it->second + s;
    }

    /// Factor of the pair sum: W_{h, 1+fvars+jpin} with the first variable
    /// collapsed into a series in t (or sigma(t)), fvars external variables
    /// kept free and jpin pinned at -2.
    SeriesMap collapsed_factor(int h, int fvars, int jpin, bool sigma_side, SigmaPowers& SP,
                               int mcap) {
        SeriesMap out;
        int m = 1 + fvars + jpin;
        if (h == 0 && m == 2) {
            // W_{0,2}(x, w) = sum_{m>=0} (m+1) x^m w^{-m-2}
            if (fvars == 1) {
                for (int mm = 0; mm <= mcap; ++mm) {
                    TruncatedSeries s = sigma_side
                                            ? SP.power(mm).scaled(ExactScalar(mm + 1))
                                            : TruncatedSeries::monomial(ExactScalar(mm + 1), mm,
                                                                        INT_MAX / 4);
                    series_map_add(out, {-mm - 2}, s);
                }
            } else {
                // pinned leg: [w^{-2}] picks the m = 0 term
                series_map_add(out, {}, TruncatedSeries::monomial(ExactScalar(1), 0, INT_MAX / 4));
            }
            return out;
        }
        const Amplitude& src = slice(h, m, fvars + 1);
        for (const auto& [key, c] : src.terms()) {
            for (size_t i = 0; i < key.size(); ++i) {
                if (i > 0 && key[i] == key[i - 1]) continue;  // distinct values once
                ExpKey rest = key_without(key, i);
                TruncatedSeries s =
                    sigma_side ? SP.power(key[i]).scaled(c)
                               : TruncatedSeries::monomial(c, key[i], INT_MAX / 4);
                series_map_add(out, rest, s);
            }
        }
        return out;
    }

    static ExactScalar multiset_split_multiplicity(const ExpKey& merged, const ExpKey& part) {
        ExactScalar mult(1);
        size_t i = 0;
        for (size_t j = 0; j < part.size();) {
            size_t jr = j;
            while (jr < part.size() && part[jr] == part[j]) ++jr;
            long want = static_cast<long>(jr - j);
            while (i < merged.size() && merged[i] < part[j]) ++i;
            size_t ir = i;
            while (ir < merged.size() && merged[ir] == part[j]) ++ir;
            long have = static_cast<long>(ir - i);
            mult *= ExactScalar(binomial(have, want));
            i = ir;
            j = jr;
        }
        return mult;
    }

    Amplitude compute_slice(int g, int n, int free) {
        for (int attempt = 0;; ++attempt) {
            try {
                return compute_slice_at(g, n, free, working_order(g, n) + 5 * attempt);
            } catch (const truncation_error&) {
                if (attempt >= 3) throw;
            }
        }
    }

    Amplitude compute_slice_at(int g, int n, int free, int M) {
        computed_.fetch_add(1);
        const int pinned = n - free;
        const int pole_bound = 2 * (3 * g - 3 + n) + 2;
        const TruncatedSeries sig = sigma(M);
        KernelTable KT = kernel(M);
        SigmaPowers SP(sig, M);
        const int mcap = M - 2;

        SeriesMap bracket;

        // unstable-edge contribution W_{0,2}(t, sigma(t)) (only (g,n) = (1,1))
        if (g >= 1) {
            if (g - 1 == 0 && n + 1 == 2) {
                TruncatedSeries d =
                    TruncatedSeries::monomial(ExactScalar(1), 1, M) - sig;
                series_map_add(bracket, {}, d.pow(-2, 1));
            } else {
                const Amplitude& low = slice(g - 1, n + 1, free + 1);
                for (const auto& [key, c] : low.terms()) {
                    for (size_t i = 0; i < key.size(); ++i) {
                        if (i > 0 && key[i] == key[i - 1]) continue;
                        ExpKey r1 = key_without(key, i);
                        for (size_t j = 0; j < r1.size(); ++j) {
                            if (j > 0 && r1[j] == r1[j - 1]) continue;
                            TruncatedSeries s =
                                SP.power(r1[j]).shifted(key[i]).truncated(1).scaled(c);
                            series_map_add(bracket, key_without(r1, j), s);
                        }
                    }
                }
            }
        }

        // pair sum over genus and external splits
        for (int h = 0; h <= g; ++h) {
            int h2 = g - h;
            for (int f1 = 0; f1 <= free - 1; ++f1) {
                int f2 = free - 1 - f1;
                for (int j1 = 0; j1 <= pinned; ++j1) {
                    int j2 = pinned - j1;
                    int m1 = 1 + f1 + j1, m2 = 1 + f2 + j2;
                    if (h == 0 && m1 == 1) continue;   // omega_{0,1} = 0
                    if (h2 == 0 && m2 == 1) continue;
                    ExactScalar pin_mult(binomial(pinned, j1));
                    SeriesMap F1 = collapsed_factor(h, f1, j1, false, SP, mcap);
                    SeriesMap F2 = collapsed_factor(h2, f2, j2, true, SP, mcap);
                    for (const auto& [mu1, s1] : F1) {
                        for (const auto& [mu2, s2] : F2) {
                            ExpKey nu(mu1.size() + mu2.size());
                            std::merge(mu1.begin(), mu1.end(), mu2.begin(), mu2.end(),
                                       nu.begin());
                            ExactScalar mult = pin_mult * multiset_split_multiplicity(nu, mu1);
                            series_map_add(bracket, nu, mul(s1, s2, 1).scaled(mult));
                        }
                    }
                }
            }
        }

        // residue against the kernel: W = sum_j K_j(t1) [t^{-1-j}] bracket
        std::map<std::pair<int, ExpKey>, ExactScalar> raw;
        for (const auto& [nu, series] : bracket) {
            if (series.known_zero()) continue;
            if (series.order() < 1)
                throw truncation_error("bracket series not trusted through t^0");
            for (int m = series.valuation(); m <= 0; ++m) {
                const ExactScalar& c = series.coeff(m);
                if (c.is_zero()) continue;
                const LaurentPoly& Kj = KT.at(-1 - m);
                for (const auto& [e1, kc] : Kj.terms())
                    raw[{e1, nu}] += kc * c;
            }
        }

        Amplitude out(free);
        for (const auto& [arr, value] : raw) {
            if (value.is_zero()) continue;
            const auto& [e1, nu] = arr;
            if (e1 < -pole_bound || e1 > -2)
                throw inconsistency_error("amplitude pole outside the Xi-basis range");
            out.set_checked(key_with(nu, e1), value);
        }
        return out;
    }

    // --- F-table decomposition ------------------------------------------------

    void decompose_rec(const std::map<ExpKey, ExactScalar>& S, int arity,
                       std::vector<int>& prefix, FTable& out) {
        if (arity == 0) {
            auto it = S.find(ExpKey{});
            if (it != S.end()) out.insert(prefix, it->second);
            return;
        }
        SeriesMapPoly grouped;
        for (const auto& [key, c] : S) {
            for (size_t i = 0; i < key.size(); ++i) {
                if (i > 0 && key[i] == key[i - 1]) continue;
                grouped[key_without(key, i)].add_term(key[i], c);
            }
        }
        std::map<int, std::map<ExpKey, ExactScalar>> by_index;
        for (const auto& [nu, poly] : grouped) {
            for (const auto& [k, c] : xi_decompose(poly)) by_index[k][nu] = c;
        }
        for (const auto& [k, sub] : by_index) {
            prefix.push_back(k);
            decompose_rec(sub, arity - 1, prefix, out);
            prefix.pop_back();
        }
    }

    using SeriesMapPoly = std::map<ExpKey, LaurentPoly>;

    void record_entry(int g, int n, const std::vector<int>& k, const ExactScalar& v) {
        std::unique_lock lk(f_mu_);
        auto [it, inserted] = f_entries_.emplace(std::make_tuple(g, n, k), v);
        if (inserted) new_entries_.push_back({g, n, k, v});
        else if (it->second != v)
            throw inconsistency_error("f_entry: conflicting cached value");
    }

    CurveParams curve_;
    int margin_;

    std::mutex series_mu_;
    TruncatedSeries sigma_;
    int sigma_order_ = 0;
    KernelTable kernel_;
    int kernel_order_ = 0;

    std::mutex amp_mu_;
    std::map<std::tuple<int, int, int>, std::shared_future<SlotPtr>> amp_futures_;
    std::atomic<long> computed_{0};

    mutable std::shared_mutex f_mu_;
    std::map<std::pair<int, int>, FTable> tables_;
    std::map<std::tuple<int, int, std::vector<int>>, ExactScalar> f_entries_;
    std::vector<NewEntry> new_entries_;
};

}  // namespace qdvol
