// qdvol: exact Masur-Veech volumes, Siegel-Veech constants and Lyapunov
// exponent sums for the principal strata of quadratic differentials.
// All outputs are exact rationals (times a power of pi); nothing is ever
// rounded.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "qdvol/analytics.hpp"
#include "qdvol/cache.hpp"
#include "qdvol/selftest.hpp"
#include "qdvol/spectral.hpp"

namespace {

using namespace qdvol;
using nlohmann::json;

struct GlobalOptions {
    std::string cache_dir;
    int truncation_margin = 0;
    int workers = 1;

    std::optional<std::filesystem::path> cache_file() const {
        if (!cache_dir.empty()) return CacheFile::file_in(cache_dir);
        if (const char* env = std::getenv("QDVOL_CACHE_DIR"); env && *env)
            return CacheFile::file_in(env);
        return std::nullopt;
    }
};

json pi_json(const std::string& quantity, int g, int n, const PiScalar& v) {
    return json{{"quantity", quantity},
                {"genus", g},
                {"poles", n},
                {"coefficient",
                 {{"num", v.coefficient().numerator().get_str()},
                  {"den", v.coefficient().denominator().get_str()}}},
                {"pi_power", v.pi_power()}};
}

std::string pi_csv_row(const std::string& quantity, int g, int n, const PiScalar& v) {
    std::ostringstream out;
    out << quantity << "," << g << "," << n << "," << v.coefficient().numerator().get_str()
        << "," << v.coefficient().denominator().get_str() << "," << v.pi_power() << ","
        << v.to_double();
    return out.str();
}

constexpr const char* kCsvHeader = "quantity,genus,poles,num,den,pi_power,float";

void emit_pi(const std::string& format, const std::string& quantity, int g, int n,
             const PiScalar& v) {
    if (format == "plain") {
        std::cout << v.str() << "\n";
    } else if (format == "json") {
        std::cout << pi_json(quantity, g, n, v).dump() << "\n";
    } else {
        std::cout << kCsvHeader << "\n" << pi_csv_row(quantity, g, n, v) << "\n";
    }
}

int run_volume(GlobalOptions& opts, Analytics& an, int g, int n, const std::string& format) {
    (void)opts;
    emit_pi(format, "volume", g, n, an.volume_principal(g, n));
    return 0;
}

int run_fcoeff(Analytics& an, int g, int n, const std::vector<int>& indices,
               const std::string& format) {
    ExactScalar v = an.session().f_entry(g, n, indices);
    if (format == "plain") {
        std::cout << v.str() << "\n";
    } else if (format == "json") {
        json j{{"quantity", "fcoeff"},
               {"genus", g},
               {"npoints", n},
               {"indices", indices},
               {"coefficient",
                {{"num", v.numerator().get_str()}, {"den", v.denominator().get_str()}}},
               {"pi_power", 0}};
        std::cout << j.dump() << "\n";
    } else {
        std::cout << "quantity,genus,npoints,indices,num,den\nfcoeff," << g << "," << n << ",";
        for (size_t i = 0; i < indices.size(); ++i)
            std::cout << (i ? " " : "") << indices[i];
        std::cout << "," << v.numerator().get_str() << "," << v.denominator().get_str() << "\n";
    }
    return 0;
}

int run_constants(Analytics& an, int g, int n, const std::string& format) {
    PiScalar c = an.carea_principal(g, n);
    ExactScalar l = an.lplus_principal(g, n);
    if (format == "plain") {
        std::cout << "c_area = " << c.str() << "\n";
        std::cout << "L+ = " << l.str() << "\n";
    } else if (format == "json") {
        json j{{"genus", g},
               {"poles", n},
               {"carea", pi_json("carea", g, n, c)},
               {"lplus",
                {{"num", l.numerator().get_str()}, {"den", l.denominator().get_str()}}}};
        std::cout << j.dump() << "\n";
    } else {
        std::cout << kCsvHeader << "\n"
                  << pi_csv_row("carea", g, n, c) << "\n"
                  << pi_csv_row("lplus", g, n, PiScalar(l, 0)) << "\n";
    }
    return 0;
}

int run_poly(Analytics& an, int g, const std::string& format) {
    PqPolynomials pq = an.pq_polynomials(g);
    RsPolynomials rs = an.rs_polynomials(g);
    if (format == "json") {
        auto coeffs = [](const RationalPolynomial& p) {
            json arr = json::array();
            for (const auto& c : p.coefficients())
                arr.push_back({{"num", c.numerator().get_str()},
                               {"den", c.denominator().get_str()}});
            return arr;
        };
        json j{{"genus", g},
               {"p", coeffs(pq.p)},
               {"q", coeffs(pq.q)},
               {"r", coeffs(rs.r)},
               {"s", coeffs(rs.s)},
               {"m_g", pq.m_g.str()},
               {"n_g", rs.n_g.str()}};
        std::cout << j.dump() << "\n";
    } else {
        std::cout << "p_" << g << "(n) = " << pq.p.str() << "\n";
        std::cout << "q_" << g << "(n) = " << pq.q.str() << "\n";
        std::cout << "r_" << g << "(n) = " << rs.r.str() << "\n";
        std::cout << "s_" << g << "(n) = " << rs.s.str() << "\n";
        std::cout << "m_" << g << " = " << pq.m_g.str() << "\n";
        std::cout << "n_" << g << " = " << rs.n_g.str() << "\n";
    }
    return 0;
}

int run_table(GlobalOptions& opts, Analytics& an, int g, int from, int to,
              const std::string& quantity, const std::string& format) {
    if (from > to) throw domain_error("table: empty range (--poles-from > --poles-to)");

    struct Row {
        int n;
        bool ok = false;
        PiScalar value;
        std::string error;
    };
    std::vector<Row> rows(static_cast<size_t>(to - from + 1));

    auto compute_row = [&](int idx) {
        Row& row = rows[static_cast<size_t>(idx)];
        row.n = from + idx;
        try {
            if (quantity == "volume")
                row.value = an.volume_principal(g, row.n);
            else if (quantity == "carea")
                row.value = an.carea_principal(g, row.n);
            else
                row.value = PiScalar(an.lplus_principal(g, row.n), 0);
            row.ok = true;
        } catch (const domain_error& e) {
            row.error = e.what();
        }
    };

    int workers = std::max(1, std::min<int>(opts.workers, to - from + 1));
    if (workers == 1) {
        for (size_t i = 0; i < rows.size(); ++i) compute_row(static_cast<int>(i));
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (int i = next.fetch_add(1); i < static_cast<int>(rows.size());
                     i = next.fetch_add(1))
                    compute_row(i);
            });
        for (auto& th : pool) th.join();
    }

    bool any_ok = false;
    for (const auto& row : rows) any_ok |= row.ok;
    if (!any_ok) throw domain_error("table: no valid strata in range");

    if (format == "json") {
        json arr = json::array();
        for (const auto& row : rows) {
            if (row.ok)
                arr.push_back(pi_json(quantity, g, row.n, row.value));
            else
                arr.push_back(json{{"quantity", quantity},
                                   {"genus", g},
                                   {"poles", row.n},
                                   {"error", row.error}});
        }
        std::cout << arr.dump() << "\n";
    } else if (format == "csv") {
        std::cout << kCsvHeader << "\n";
        for (const auto& row : rows) {
            if (row.ok)
                std::cout << pi_csv_row(quantity, g, row.n, row.value) << "\n";
            else
                std::cout << quantity << "," << g << "," << row.n << ",,,,SKIPPED: " << row.error
                          << "\n";
        }
    } else {
        for (const auto& row : rows) {
            std::cout << quantity << " g=" << g << " n=" << row.n << "  ";
            if (row.ok)
                std::cout << row.value.str() << "\n";
            else
                std::cout << "SKIPPED (" << row.error << ")\n";
        }
    }
    return 0;
}

int run_asym(Analytics& an, int g, int n, const std::string& format) {
    AsymReport vol = an.asymptotics(g, n, AsymMode::volume);
    AsymReport lp = an.asymptotics(g, n, AsymMode::lplus);
    if (format == "json") {
        json j{{"genus", g},
               {"poles", n},
               {"volume", {{"m_g", vol.coefficient.str()},
                           {"log_estimate", vol.log_estimate},
                           {"ratio", vol.ratio}}},
               {"lplus", {{"ng_over_mg", lp.coefficient.str()},
                          {"estimate", std::exp(lp.log_estimate)},
                          {"ratio", lp.ratio}}}};
        std::cout << j.dump() << "\n";
    } else {
        std::cout << "volume: m_" << g << " = " << vol.coefficient.str()
                  << ", log(estimate) = " << vol.log_estimate
                  << ", exact/estimate = " << vol.ratio << "\n";
        std::cout << "lplus: n_" << g << "/m_" << g << " = " << lp.coefficient.str()
                  << ", estimate = " << std::exp(lp.log_estimate)
                  << ", exact/estimate = " << lp.ratio << "\n";
    }
    return 0;
}

int run_selftest(const std::string& level_name, const char* argv0) {
    selftest::Level level =
        level_name == "quick" ? selftest::Level::quick : selftest::Level::full;
    auto results = selftest::run(level, [](const selftest::CriterionResult& r) {
        std::string tail = r.pass ? std::string() : "  " + r.detail;
        std::printf("[%2d] %s  %-70s (%.2fs)%s\n", r.id, r.pass ? "PASS" : "FAIL",
                    r.name.c_str(), r.seconds, tail.c_str());
        std::fflush(stdout);
    }, argv0 ? std::string(argv0) : std::string());
    bool ok = selftest::all_passed(results);
    std::printf("%s (%zu criteria)\n", ok ? "ALL PASS" : "FAILURES PRESENT", results.size());
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact Masur-Veech volumes for principal strata of quadratic differentials"};
    app.require_subcommand(1);

    GlobalOptions opts;
    app.add_option("--cache-dir", opts.cache_dir, "directory for the F-table cache");
    app.add_option("--truncation-margin", opts.truncation_margin,
                   "extra truncation order on every series")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--workers", opts.workers, "worker threads for table ranges")
        ->check(CLI::PositiveNumber);

    int genus = 0, poles = 0, npoints = 0, from = 0, to = 0;
    std::string format = "plain", quantity = "volume", level = "quick", indices_arg;

    auto add_format = [&](CLI::App* cmd) {
        cmd->add_option("--format", format, "plain|json|csv")
            ->check(CLI::IsMember({"plain", "json", "csv"}));
    };

    auto* c_volume = app.add_subcommand("volume", "Masur-Veech volume of Q(1^{4g-4+n},-1^n)");
    c_volume->add_option("--genus", genus, "genus")->required();
    c_volume->add_option("--poles", poles, "number of simple poles")->required();
    add_format(c_volume);

    auto* c_fcoeff = app.add_subcommand("fcoeff", "F_{g,n}[k_1,...,k_n] table coefficient");
    c_fcoeff->add_option("--genus", genus)->required();
    c_fcoeff->add_option("--npoints", npoints)->required();
    c_fcoeff->add_option("--indices", indices_arg, "comma-separated k_1,k_2,...")->required();
    add_format(c_fcoeff);

    auto* c_constants = app.add_subcommand("constants", "c_area and L+ of the stratum");
    c_constants->add_option("--genus", genus)->required();
    c_constants->add_option("--poles", poles)->required();
    add_format(c_constants);

    auto* c_poly = app.add_subcommand("poly", "fixed-genus polynomials p,q,r,s and m_g,n_g");
    c_poly->add_option("--genus", genus)->required();
    add_format(c_poly);

    auto* c_table = app.add_subcommand("table", "tabulate a quantity over a pole range");
    c_table->add_option("--genus", genus)->required();
    c_table->add_option("--poles-from", from)->required();
    c_table->add_option("--poles-to", to)->required();
    c_table->add_option("--quantity", quantity, "volume|carea|lplus")
        ->check(CLI::IsMember({"volume", "carea", "lplus"}));
    add_format(c_table);

    auto* c_asym = app.add_subcommand("asym", "asymptotic estimates and convergence ratios");
    c_asym->add_option("--genus", genus)->required();
    c_asym->add_option("--poles", poles)->required();
    add_format(c_asym);

    auto* c_selftest = app.add_subcommand("selftest", "run the acceptance criteria");
    c_selftest->add_option("--level", level, "quick|full")
        ->check(CLI::IsMember({"quick", "full"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_selftest->parsed()) return run_selftest(level, argv[0]);

        TrSession session(CurveParams::principal(), opts.truncation_margin);
        if (auto cache = opts.cache_file()) {
            auto res = CacheFile::load_into(*cache, session);
            using S = CacheFile::LoadStatus;
            if (res.status == S::version_mismatch || res.status == S::curve_mismatch ||
                res.status == S::rejected)
                std::cerr << "warning: " << res.message << "\n";
        }
        Analytics an(session);

        int rc = 1;
        if (c_volume->parsed()) {
            rc = run_volume(opts, an, genus, poles, format);
        } else if (c_fcoeff->parsed()) {
            std::vector<int> indices;
            std::stringstream ss(indices_arg);
            std::string item;
            while (std::getline(ss, item, ',')) indices.push_back(std::stoi(item));
            rc = run_fcoeff(an, genus, npoints, indices, format);
        } else if (c_constants->parsed()) {
            rc = run_constants(an, genus, poles, format);
        } else if (c_poly->parsed()) {
            rc = run_poly(an, genus, format);
        } else if (c_table->parsed()) {
            rc = run_table(opts, an, genus, from, to, quantity, format);
        } else if (c_asym->parsed()) {
            rc = run_asym(an, genus, poles, format);
        }

        if (auto cache = opts.cache_file()) CacheFile::save(*cache, session);
        return rc;
    } catch (const domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const truncation_error& e) {
        std::cerr << "truncation error: " << e.what() << "\n";
        return 2;
    } catch (const inconsistency_error& e) {
        std::cerr << "internal consistency failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
