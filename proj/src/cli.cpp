// Reproducibility driver: each subcommand runs a named experiment over the
// exact-arithmetic library, prints a human summary, and can emit a
// machine-readable JSON report. Identical configuration (including the
// seed) produces byte-identical reports: nothing time- or host-dependent
// enters the output.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "tmotive/analytic.hpp"
#include "tmotive/elim.hpp"
#include "tmotive/lattice.hpp"
#include "tmotive/ore.hpp"
#include "tmotive/sampling.hpp"

using namespace tmotive;

namespace {

struct RunConfig {
    std::string command;
    std::uint32_t q = 2;
    int levels = 1;
    std::int64_t precision = 48; // certification target, whole valuation units
    std::int64_t ram = 96;       // relative slot budget for divisions and series
    int order = 6;               // T-order of random elimination instances
    std::string a_literal;       // series literal for the parameter a / s11
    int kmax = 4;
    std::uint64_t seed = 7;
    std::string out_path;
    bool json = false;
};

struct Check {
    std::string name;
    bool pass;
    std::string detail;
};

struct Report {
    std::string command;
    std::vector<std::pair<std::string, std::string>> values;
    std::vector<Check> checks;
    std::vector<Report> sub;

    void value(const std::string& k, const std::string& v) { values.emplace_back(k, v); }
    void check(const std::string& name, bool pass, const std::string& detail = "") {
        checks.push_back({name, pass, detail});
    }
    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        for (const auto& r : sub)
            if (!r.all_pass()) return false;
        return true;
    }
};

std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 8);
    for (char ch : s) {
        switch (ch) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        default:
            if (static_cast<unsigned char>(ch) < 0x20) {
                char buf[8];
                std::snprintf(buf, sizeof buf, "\\u%04x", ch);
                out += buf;
            } else {
                out += ch;
            }
        }
    }
    return out;
}

void emit_report_json(const Report& r, std::ostream& os, int indent) {
    std::string pad(static_cast<std::size_t>(indent), ' ');
    std::string pad2(static_cast<std::size_t>(indent + 2), ' ');
    os << "{\n" << pad2 << "\"command\": \"" << json_escape(r.command) << "\",\n";
    os << pad2 << "\"values\": {";
    for (std::size_t i = 0; i < r.values.size(); ++i) {
        if (i) os << ",";
        os << "\n" << pad2 << "  \"" << json_escape(r.values[i].first) << "\": \""
           << json_escape(r.values[i].second) << "\"";
    }
    os << (r.values.empty() ? "" : "\n" + pad2) << "},\n";
    os << pad2 << "\"checks\": [";
    for (std::size_t i = 0; i < r.checks.size(); ++i) {
        if (i) os << ",";
        os << "\n" << pad2 << "  {\"name\": \"" << json_escape(r.checks[i].name) << "\", \"pass\": "
           << (r.checks[i].pass ? "true" : "false") << ", \"detail\": \""
           << json_escape(r.checks[i].detail) << "\"}";
    }
    os << (r.checks.empty() ? "" : "\n" + pad2) << "],\n";
    if (!r.sub.empty()) {
        os << pad2 << "\"subreports\": [";
        for (std::size_t i = 0; i < r.sub.size(); ++i) {
            if (i) os << ",";
            os << "\n" << pad2 << "  ";
            emit_report_json(r.sub[i], os, indent + 4);
        }
        os << "\n" << pad2 << "],\n";
    }
    os << pad2 << "\"all_pass\": " << (r.all_pass() ? "true" : "false") << "\n" << pad << "}";
}

std::string document_json(const RunConfig& cfg, const Report& r) {
    std::ostringstream os;
    os << "{\n  \"schema\": \"tmotive-report/1\",\n";
    os << "  \"config\": {\"command\": \"" << json_escape(cfg.command) << "\", \"q\": " << cfg.q
       << ", \"levels\": " << cfg.levels << ", \"precision\": " << cfg.precision
       << ", \"ram\": " << cfg.ram << ", \"order\": " << cfg.order << ", \"a\": \""
       << json_escape(cfg.a_literal) << "\", \"kmax\": " << cfg.kmax << ", \"seed\": " << cfg.seed
       << "},\n  \"report\": ";
    emit_report_json(r, os, 2);
    os << "\n}\n";
    return os.str();
}

void print_summary(const Report& r, std::ostream& os, int depth = 0) {
    std::string pad(static_cast<std::size_t>(2 * depth), ' ');
    os << pad << "== " << r.command << " ==\n";
    for (const auto& [k, v] : r.values) os << pad << "  " << k << " = " << v << "\n";
    for (const auto& c : r.checks) {
        os << pad << "  [" << (c.pass ? "PASS" : "FAIL") << "] " << c.name;
        if (!c.detail.empty()) os << " (" << c.detail << ")";
        os << "\n";
    }
    for (const auto& s : r.sub) print_summary(s, os, depth + 1);
    if (depth == 0) {
        int total = 0, passed = 0;
        std::vector<const Report*> stack{&r};
        while (!stack.empty()) {
            const Report* cur = stack.back();
            stack.pop_back();
            for (const auto& c : cur->checks) {
                ++total;
                passed += c.pass ? 1 : 0;
            }
            for (const auto& s : cur->sub) stack.push_back(&s);
        }
        os << r.command << ": " << passed << "/" << total << " checks passed\n";
    }
}

Puiseux default_small_a(const TowerPtr& tw) {
    return Puiseux::monomial(tw, tw->q2_stage(), 1, 1, tw->omega_idx());
}

Puiseux config_a(const RunConfig& cfg, const TowerPtr& tw) {
    if (cfg.a_literal.empty()) return default_small_a(tw);
    return parse_puiseux(tw, cfg.a_literal);
}

std::string fmt2x1(const Puiseux& x, const Puiseux& y) { return "(" + x.str() + ", " + y.str() + ")"; }

Report run_periods(const RunConfig& cfg, const TowerPtr& tw) {
    Report r;
    r.command = "periods";
    Rational target(cfg.precision);
    const PeriodData& P = periods(tw, target, cfg.ram);
    std::int64_t q = tw->q();
    Rational v1(-q, q - 1), v2(-q * q, q * q - 1);
    r.value("v(pi1)", P.pi1.val().str());
    r.value("v(pi2)", P.pi2.val().str());
    r.value("pi1", P.pi1.str());
    r.value("pi2", P.pi2.str());
    r.value("residual(pi1)", P.res1.str());
    r.value("residual(pi2)", P.res2.str());
    r.check("first period valuation is -q/(q-1)", P.pi1.val() == v1, P.pi1.val().str());
    r.check("second period valuation is -q^2/(q^2-1)", P.pi2.val() == v2, P.pi2.val().str());
    r.check("first exponential residual clears the target", P.res1 >= target, P.res1.str());
    r.check("second exponential residual clears the target", P.res2 >= target, P.res2.str());
    return r;
}

Report run_dseries(const RunConfig& cfg, const TowerPtr& tw) {
    Report r;
    r.command = "dseries";
    Rational target(cfg.precision);
    Puiseux a = config_a(cfg, tw);
    DSeries ds = d_series(a, target, cfg.ram);
    std::int64_t q = tw->q();
    r.value("a", a.str());
    r.value("v(d0)", ds.frakd[0].val().str());
    r.value("v(d1)", ds.frakd[1].val().str());
    r.value("v(d2)", ds.frakd[2].val().str());
    r.value("agreement", ds.agreement.str());
    r.value("cutoff", ds.cutoff.str());
    r.check("head coefficient valuation is -q/(q^2-1)", ds.frakd[0].val() == Rational(-q, q * q - 1),
            ds.frakd[0].val().str());
    r.check("grouped sum matches the direct series past the cutoff", ds.agreement >= ds.cutoff,
            ds.agreement.str() + " >= " + ds.cutoff.str());
    // the dropped groups start at the cutoff, so the recomposition misses the
    // series by exactly the reported agreement valuation
    Puiseux recomposed = ds.frakd[0] * a + ds.frakd[1] * frob_twist(a, 1) + ds.frakd[2] * frob_twist(a, 2);
    r.check("coefficient form recomposes the series up to the reported agreement",
            (ds.D - recomposed).val_lower() == ds.agreement, (ds.D - recomposed).val_lower().str());
    return r;
}

Report run_siegel(const RunConfig& cfg, const TowerPtr& tw) {
    Report r;
    r.command = "siegel";
    Rational target(cfg.precision);
    Puiseux a = config_a(cfg, tw);
    Puiseux zero = Puiseux::zero(tw, 0);
    Puiseux omega = Puiseux::from_ff(ff_omega(tw));
    r.value("a", a.str());

    // split module: the Siegel row collapses to (0, omega)
    ExpSeries E0 = exp_series_auto(make_Ma(Puiseux::zero(tw, 0)), Rational(-2), target, cfg.ram);
    SiegelMatrix S0 = siegel(triangular_kernel_solve(E0, Triangular::upper, target, cfg.ram));
    r.value("S(split)", fmt2x1(S0.S[0][0], S0.S[0][1]));
    r.check("split module row is (0, omega)",
            !S0.S[0][0].is_nonzero() && !(S0.S[0][1] - omega).is_nonzero());

    // deformed module: row equals the independently summed series value
    ExpSeries Et = exp_series_auto(make_Mt(a), Rational(-2), target, cfg.ram);
    LatticeBasis Bt = triangular_kernel_solve(Et, Triangular::lower, target, cfg.ram);
    SiegelMatrix St = siegel(Bt, cfg.ram);
    SiegelPoint sp = siegel_s(a, target, cfg.ram);
    r.value("S(deformed)", fmt2x1(St.S[0][0], St.S[0][1]));
    r.value("s(a)", sp.s.str());
    r.check("deformed row head matches the series value", !(St.S[0][0] - sp.s).is_nonzero(),
            (St.S[0][0] - sp.s).val_lower().str());
    r.check("deformed row tail is omega", !(St.S[0][1] - omega).is_nonzero());

    // a tail generator equal to a head generator
    LatticeBasis dup;
    dup.tw = tw;
    dup.n = 2;
    dup.r = 3;
    dup.provenance = "synthetic duplicate";
    Puiseux one = Puiseux::one(tw);
    dup.cols = {Vec{one, zero}, Vec{zero, one}, Vec{one, zero}};
    SiegelMatrix Sd = siegel(dup, cfg.ram);
    r.value("S(duplicate)", fmt2x1(Sd.S[0][0], Sd.S[0][1]));
    r.check("duplicated generator row is (1, 0)",
            !(Sd.S[0][0] - one).is_nonzero() && !Sd.S[0][1].is_nonzero());

    // the deformation does not move the lattice class
    ExpSeries Ea = exp_series_auto(make_Ma(a), Rational(-2), target, cfg.ram);
    SiegelMatrix Sa = siegel(triangular_kernel_solve(Ea, Triangular::upper, target, cfg.ram), cfg.ram);
    SiegelMatrix Ssplit;
    Ssplit.S = {Vec{zero, omega}};
    IsoResult iso = lattices_isomorphic_1x2(Sa, Ssplit, Rational(8));
    r.value("S(deformed upper)", fmt2x1(Sa.S[0][0], Sa.S[0][1]));
    r.check("deformed upper row normalizes to the split row",
            iso.verdict == IsoVerdict::equal_after_normalization, "certified below " + iso.below.str());
    return r;
}

Report run_dual_check(const RunConfig& cfg, const TowerPtr& tw) {
    Report r;
    r.command = "dual-check";
    Rational target(cfg.precision);
    Puiseux omega = Puiseux::from_ff(ff_omega(tw));
    const PeriodData& P = periods(tw, target, cfg.ram);

    auto row = [&](const Puiseux& s11) {
        SiegelMatrix S;
        S.S = {Vec{s11, omega}};
        return S;
    };
    auto describe = [](const DualCert& c) {
        std::string s = "rank " + std::to_string(c.rank);
        s += c.exact ? ", exact" : ", certified below " + c.certified_below.str();
        return s;
    };

    struct Case {
        std::string name;
        Puiseux s11;
        bool expected;
    };
    std::vector<Case> cases;
    if (!cfg.a_literal.empty()) {
        Puiseux s11 = parse_puiseux(tw, cfg.a_literal);
        DualCert c = dual_exists(row(s11));
        r.value("s11", s11.str());
        r.value("verdict", c.exists ? "dual exists" : "no dual");
        r.value("certificate", describe(c));
    }
    cases.push_back({"zero head entry has no dual", Puiseux::zero(tw, 0), false});
    cases.push_back({"quadratic Laurent head entry has no dual",
                     omega * Puiseux::monomial(tw, 0, 1, 1, 1), false});
    cases.push_back({"fractional-valuation head entry has a dual", P.pi1, tw->q() != 2});
    for (const auto& cs : cases) {
        DualCert c = dual_exists(row(cs.s11));
        r.check(cs.name, c.exists == cs.expected, describe(c));
    }
    return r;
}

Report run_iso_check(const RunConfig& cfg, const TowerPtr& tw) {
    Report r;
    r.command = "iso-check";
    Puiseux a = config_a(cfg, tw);
    Puiseux omega = Puiseux::from_ff(ff_omega(tw));
    auto mat = [&](const Puiseux& p) { return make_Ma(p).A[0]; };

    SemilinearResult self = solve_semilinear_bounded(mat(a), mat(a), 0, cfg.ram);
    r.value("a", a.str());
    r.value("self solution dimension", std::to_string(self.dim));
    r.check("identity deformation admits a unit automorphism", self.unit_exists,
            "dimension " + std::to_string(self.dim));

    SemilinearResult twisted = solve_semilinear_bounded(mat(a), mat(omega * a), cfg.kmax, cfg.ram);
    r.check("quadratic-subfield ratio admits a unit", twisted.unit_exists,
            "kmax " + std::to_string(cfg.kmax));

    Puiseux one = Puiseux::one(tw);
    Puiseux th = Puiseux::theta(tw);
    bool found = false;
    for (int k = 0; k <= 3; ++k)
        if (solve_semilinear_bounded(mat(one), mat(th), k, cfg.ram).unit_exists) found = true;
    r.check("ratio outside the quadratic subfield has no unit through degree 3", !found);
    return r;
}

Report run_eliminate(const RunConfig& cfg, const TowerPtr& tw) {
    Report r;
    r.command = "eliminate";
    Sampler smp(cfg.seed);
    int stage = tw->q2_stage();
    int chain_ok = 0, u_ok = 0, roundtrip_ok = 0;
    const int instances = 20;
    for (int i = 0; i < instances; ++i) {
        Puiseux a11 = smp.scalar(tw, stage, -2, 3);
        Puiseux a12 = smp.scalar(tw, stage, -2, 3);
        Puiseux a21 = smp.scalar_nonzero(tw, stage, -2, 3);
        TPoly X2 = smp.tpoly(tw, stage, static_cast<std::size_t>(cfg.order), -2, 3);
        QMatrix q = build_Q(a11, a12, a21);
        TSeriesVec X = reconstruct_from_X2(a21, X2, cfg.ram);
        auto res = residual_system(q, X);
        bool chain = res[0].vanishes_at_prec() && res[1].vanishes_at_prec() &&
                     eq_at_prec(twist(res[2], 1), eliminated_residual(a11, a12, a21, X2, cfg.ram));
        chain_ok += chain ? 1 : 0;
        bool uok = true;
        UVParams p{};
        try {
            p = uv_reparam(a11, a12, a21, cfg.ram);
        } catch (const ContractionFailure&) {
            uok = false;
        }
        u_ok += uok ? 1 : 0;
        if (uok) {
            auto back = uv_inverse(p, cfg.ram);
            roundtrip_ok += (eq_at_prec(back[0], a11) && eq_at_prec(back[1], a12) &&
                             eq_at_prec(back[2], a21))
                                ? 1
                                : 0;
        }
    }
    r.value("instances", std::to_string(instances));
    r.value("T-order", std::to_string(cfg.order));
    r.check("derivation-chain identity holds on every instance", chain_ok == instances,
            std::to_string(chain_ok) + "/" + std::to_string(instances));
    r.check("both closed forms of u agree on every instance", u_ok == instances,
            std::to_string(u_ok) + "/" + std::to_string(instances));
    r.check("parameter change round-trips on every instance", roundtrip_ok == instances,
            std::to_string(roundtrip_ok) + "/" + std::to_string(instances));
    Puiseux za = default_small_a(tw);
    r.check("vanishing input eliminates to zero",
            eliminated_residual(za, za, za, TPoly::zero(tw), cfg.ram).vanishes_at_prec());
    return r;
}

Report run_all(const RunConfig& cfg, const TowerPtr& tw) {
    Report r;
    r.command = "all";
    r.sub.push_back(run_periods(cfg, tw));
    r.sub.push_back(run_dseries(cfg, tw));
    r.sub.push_back(run_siegel(cfg, tw));
    r.sub.push_back(run_dual_check(cfg, tw));
    r.sub.push_back(run_iso_check(cfg, tw));
    r.sub.push_back(run_eliminate(cfg, tw));
    return r;
}

int usage(std::ostream& os) {
    os << "usage: tmotive-cli <command> [flags]\n"
          "commands: periods | siegel | dual-check | iso-check | dseries | eliminate | all\n"
          "flags:\n"
          "  --q N          base field size (2 or 3; default 2)\n"
          "  --precision N  certification target in valuation units (default 48)\n"
          "  --ram N        relative slot budget for series work (default 96)\n"
          "  --order N      T-order of random elimination instances (default 6)\n"
          "  --a LIT        series literal for the parameter (e.g. \"F4:[0,1]*t^(1)\")\n"
          "  --kmax N       degree bound for isomorphism search (default 4)\n"
          "  --seed N       seed for random instances (default 7)\n"
          "  --out FILE     write the JSON report to FILE\n"
          "  --json         print the JSON report to stdout instead of the summary\n";
    return 2;
}

} // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    std::vector<std::string> args(argv + 1, argv + argc);
    if (args.empty()) return usage(std::cerr);
    cfg.command = args[0];
    try {
        for (std::size_t i = 1; i < args.size(); ++i) {
            auto need = [&](const char* flag) -> std::string {
                if (i + 1 >= args.size()) throw ParseError(std::string("missing value for ") + flag);
                return args[++i];
            };
            if (args[i] == "--q") cfg.q = static_cast<std::uint32_t>(std::stoul(need("--q")));
            else if (args[i] == "--precision") cfg.precision = std::stoll(need("--precision"));
            else if (args[i] == "--ram") cfg.ram = std::stoll(need("--ram"));
            else if (args[i] == "--order") cfg.order = std::stoi(need("--order"));
            else if (args[i] == "--a") cfg.a_literal = need("--a");
            else if (args[i] == "--kmax") cfg.kmax = std::stoi(need("--kmax"));
            else if (args[i] == "--seed") cfg.seed = std::stoull(need("--seed"));
            else if (args[i] == "--out") cfg.out_path = need("--out");
            else if (args[i] == "--json") cfg.json = true;
            else if (args[i] == "--help" || args[i] == "-h") return usage(std::cout);
            else throw ParseError("unknown flag: " + args[i]);
        }
        cfg.levels = cfg.q % 2 == 1 ? 2 : 1;
        auto tw = Tower::make(cfg.q, cfg.levels);

        Report report;
        if (cfg.command == "periods") report = run_periods(cfg, tw);
        else if (cfg.command == "dseries") report = run_dseries(cfg, tw);
        else if (cfg.command == "siegel") report = run_siegel(cfg, tw);
        else if (cfg.command == "dual-check") report = run_dual_check(cfg, tw);
        else if (cfg.command == "iso-check") report = run_iso_check(cfg, tw);
        else if (cfg.command == "eliminate") report = run_eliminate(cfg, tw);
        else if (cfg.command == "all") report = run_all(cfg, tw);
        else return usage(std::cerr);

        std::string doc = document_json(cfg, report);
        if (!cfg.out_path.empty()) {
            std::ofstream f(cfg.out_path, std::ios::binary);
            if (!f) throw Error("cannot open output file: " + cfg.out_path);
            f << doc;
        }
        if (cfg.json) std::cout << doc;
        else print_summary(report, std::cout);
        return report.all_pass() ? 0 : 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
