#ifndef TMOTIVE_PUISEUX_HPP
#define TMOTIVE_PUISEUX_HPP

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "tmotive/errors.hpp"
#include "tmotive/ff.hpp"
#include "tmotive/rational.hpp"

namespace tmotive {

// Truncated Puiseux series over a field tower stage, in the uniformizer
// t = theta^{-1/e}:   x = sum_{s >= lo} c_s * t^s,   v_inf(x) = lo / e.
//
// "Slots" are exponents of t (units of 1/e of v_inf). `prec` is the absolute
// slot bound: coefficients at slots >= prec are unknown. prec == EXACT means
// the stored terms are the whole value. Zero is tri-state:
//   - exact zero:        no terms, prec == EXACT
//   - zero at precision: no terms, prec finite
//   - nonzero:           leading stored coefficient != 0
//
// Values are kept in canonical form: no leading/trailing zero coefficients,
// no terms at slots >= prec, and the ramification e reduced by the gcd of
// all occupied slots (and prec). Mixed-ramification operands align to the
// lcm, so e is free to differ between values.
class Puiseux {
public:
    static constexpr std::int64_t EXACT = std::numeric_limits<std::int64_t>::max();

    TowerPtr tw;
    int stage = 0;
    std::int64_t e = 1;
    std::int64_t lo = 0;
    std::int64_t prec = EXACT;
    std::vector<std::uint32_t> c;

    Puiseux() = default;

    static Puiseux zero(TowerPtr tw, int stage) {
        Puiseux x; x.tw = std::move(tw); x.stage = stage; return x;
    }
    static Puiseux zero_at(TowerPtr tw, int stage, std::int64_t e, std::int64_t prec_slots) {
        Puiseux x; x.tw = std::move(tw); x.stage = stage; x.e = e; x.prec = prec_slots; x.normalize(); return x;
    }
    static Puiseux monomial(TowerPtr tw, int stage, std::int64_t e, std::int64_t slot, std::uint32_t coeff,
                            std::int64_t prec_slots = EXACT) {
        Puiseux x; x.tw = std::move(tw); x.stage = stage; x.e = e; x.lo = slot; x.prec = prec_slots;
        x.c.assign(1, coeff); x.normalize(); return x;
    }
    static Puiseux scalar(TowerPtr tw, int stage, std::uint32_t coeff) {
        return monomial(std::move(tw), stage, 1, 0, coeff);
    }
    static Puiseux from_ff(const FF& a) { return scalar(a.tw, a.stage, a.idx); }
    // theta = t^{-1}: v_inf(theta) = -1.
    static Puiseux theta(TowerPtr tw) { return monomial(std::move(tw), 0, 1, -1, 1); }
    static Puiseux one(TowerPtr tw) { return scalar(std::move(tw), 0, 1); }

    bool is_exact() const { return prec == EXACT; }
    bool is_nonzero() const { return !c.empty(); }
    bool is_exact_zero() const { return c.empty() && prec == EXACT; }
    bool is_zero_at_prec() const { return c.empty() && prec != EXACT; }

    // Exact valuation of a certified-nonzero value.
    Rational val() const {
        if (!is_nonzero()) throw Error("val: value has no certified nonzero digit");
        return Rational(lo, e);
    }
    // Lower bound on the valuation that holds in all three states.
    Rational val_lower() const {
        if (is_nonzero()) return Rational(lo, e);
        if (is_zero_at_prec()) return Rational(prec, e);
        return Rational(std::numeric_limits<std::int32_t>::max());
    }

    std::uint32_t coeff_at_slot(std::int64_t s) const {
        if (s < lo || s >= lo + static_cast<std::int64_t>(c.size())) return 0;
        return c[static_cast<std::size_t>(s - lo)];
    }

    FF lead_coeff() const {
        if (!is_nonzero()) throw Error("lead_coeff: value has no certified nonzero digit");
        return FF(tw, stage, c.front());
    }

    void normalize() {
        if (prec != EXACT) {
            std::int64_t keep = prec - lo;
            if (keep < 0) keep = 0;
            if (static_cast<std::int64_t>(c.size()) > keep) c.resize(static_cast<std::size_t>(keep));
        }
        std::size_t lead = 0;
        while (lead < c.size() && c[lead] == 0) ++lead;
        if (lead) { lo += static_cast<std::int64_t>(lead); c.erase(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(lead)); }
        while (!c.empty() && c.back() == 0) c.pop_back();
        if (c.empty()) { lo = 0; if (prec == EXACT) e = 1; }
        reduce_ram();
    }

    friend Puiseux operator-(Puiseux a) {
        for (auto& x : a.c) x = a.tw->neg(a.stage, x);
        return a;
    }

    friend Puiseux operator+(const Puiseux& a, const Puiseux& b) { return add_impl(a, b, false); }
    friend Puiseux operator-(const Puiseux& a, const Puiseux& b) { return add_impl(a, b, true); }

    friend Puiseux operator*(const Puiseux& a, const Puiseux& b) {
        Puiseux x = a, y = b;
        align(x, y);
        Puiseux r;
        r.tw = x.tw; r.stage = std::max(x.stage, y.stage); r.e = x.e;

        // Result precision: min over inexact operands of (prec + other's lo),
        // where a zero-at-precision operand contributes its prec as lo.
        std::int64_t rp = EXACT;
        auto eff_lo = [](const Puiseux& v) { return v.is_nonzero() ? v.lo : (v.prec == EXACT ? EXACT : v.prec); };
        if (x.prec != EXACT) rp = std::min(rp, eff_lo(y) == EXACT ? EXACT : x.prec + eff_lo(y));
        if (y.prec != EXACT) rp = std::min(rp, eff_lo(x) == EXACT ? EXACT : y.prec + eff_lo(x));
        r.prec = rp;
        if (x.c.empty() || y.c.empty()) { r.normalize(); return r; }

        r.lo = x.lo + y.lo;
        std::int64_t len = static_cast<std::int64_t>(x.c.size() + y.c.size()) - 1;
        if (r.prec != EXACT) len = std::min(len, r.prec - r.lo);
        if (len <= 0) { r.c.clear(); r.normalize(); return r; }
        r.c.assign(static_cast<std::size_t>(len), 0);
        const Tower& T = *r.tw;
        int st = r.stage;
        for (std::size_t i = 0; i < x.c.size(); ++i) {
            std::uint32_t xi = x.c[i];
            if (xi == 0) continue;
            for (std::size_t j = 0; j < y.c.size(); ++j) {
                if (i + j >= static_cast<std::size_t>(len)) break;
                std::uint32_t yj = y.c[j];
                if (yj == 0) continue;
                r.c[i + j] = T.add(st, r.c[i + j], T.mul(st, xi, yj));
            }
        }
        r.normalize();
        return r;
    }

    // x^{q^j}: coefficients to the q^j, slots scaled by q^j.
    friend Puiseux frob_twist(const Puiseux& a, std::uint64_t j, std::int64_t prec_cap = EXACT) {
        if (j == 0) {
            if (prec_cap == EXACT) return a;
            Puiseux r = a; r.prec = std::min(r.prec, prec_cap); r.normalize(); return r;
        }
        std::int64_t f = 1;
        for (std::uint64_t i = 0; i < j; ++i) {
            f *= static_cast<std::int64_t>(a.tw->q());
            if (f > (std::int64_t{1} << 40)) throw Error("frob_twist: twist too large");
        }
        Puiseux r;
        r.tw = a.tw; r.stage = a.stage; r.e = a.e;
        r.prec = a.prec == EXACT ? EXACT : a.prec * f;
        if (prec_cap != EXACT) r.prec = std::min(r.prec, prec_cap);
        r.lo = a.lo * f;
        if (!a.c.empty()) {
            std::int64_t len = (static_cast<std::int64_t>(a.c.size()) - 1) * f + 1;
            if (r.prec != EXACT) len = std::min(len, r.prec - r.lo);
            if (len > 0) {
                r.c.assign(static_cast<std::size_t>(len), 0);
                for (std::size_t i = 0; i < a.c.size(); ++i) {
                    std::int64_t pos = static_cast<std::int64_t>(i) * f;
                    if (pos >= len) break;
                    if (a.c[i]) r.c[static_cast<std::size_t>(pos)] = a.tw->frob(a.stage, a.c[i], j);
                }
            }
        }
        r.normalize();
        return r;
    }

    // Unique q^j-th root (the tower is perfect). Ramification may grow by q^j.
    friend Puiseux root_twist(const Puiseux& a, std::uint64_t j) {
        if (j == 0) return a;
        std::int64_t f = 1;
        for (std::uint64_t i = 0; i < j; ++i) f *= static_cast<std::int64_t>(a.tw->q());
        Puiseux r = a;
        bool divisible = (a.lo % f == 0) && (a.prec == EXACT || a.prec % f == 0);
        if (divisible)
            for (std::size_t i = 0; i < a.c.size(); ++i)
                if (a.c[i] && static_cast<std::int64_t>(i) % f != 0) { divisible = false; break; }
        if (divisible) {
            r.lo = a.lo / f;
            r.prec = a.prec == EXACT ? EXACT : a.prec / f;
            r.c.assign(a.c.empty() ? 0 : (a.c.size() - 1) / static_cast<std::size_t>(f) + 1, 0);
            for (std::size_t i = 0; i < a.c.size(); i += static_cast<std::size_t>(f))
                r.c[i / static_cast<std::size_t>(f)] = a.tw->unfrob(a.stage, a.c[i], j);
        } else {
            r.e = a.e * f;
            for (auto& x : r.c) x = x ? a.tw->unfrob(a.stage, x, j) : 0;
        }
        r.normalize();
        return r;
    }

    // Reciprocal. For inexact input the relative precision is preserved; an
    // exact input must be a monomial (otherwise use inv_to with a target).
    friend Puiseux inv(const Puiseux& a) {
        if (!a.is_nonzero()) throw DivisionByZeroAtPrecision("inv: no certified nonzero digit");
        if (a.c.size() == 1) {
            Puiseux r = a;
            r.lo = -a.lo;
            r.prec = a.prec == EXACT ? EXACT : a.prec - 2 * a.lo;
            r.c[0] = a.tw->inv(a.stage, a.c[0]);
            r.normalize();
            return r;
        }
        if (a.prec == EXACT) throw Error("inv: exact non-monomial needs a target precision (inv_to)");
        return inv_to(a, a.prec - a.lo);
    }

    // Reciprocal with `rel` certified slots past the leading term.
    friend Puiseux inv_to(const Puiseux& a, std::int64_t rel) {
        if (!a.is_nonzero()) throw DivisionByZeroAtPrecision("inv_to: no certified nonzero digit");
        if (a.prec != EXACT) rel = std::min(rel, a.prec - a.lo);
        if (rel <= 0) throw InsufficientPrecision("inv_to: nonpositive relative target");
        // Newton doubling on y ~ 1/a: y' = y + y*(1 - a*y). The iterates are
        // handled as exact polynomials in the stored digits; the quadratic
        // convergence argument, not interval bookkeeping, justifies the final
        // precision claim.
        auto snapshot = [](Puiseux v) { v.prec = EXACT; v.normalize(); return v; };
        Puiseux one_ = Puiseux::scalar(a.tw, a.stage, 1);
        Puiseux y = Puiseux::monomial(a.tw, a.stage, a.e, -a.lo, a.tw->inv(a.stage, a.c[0]));
        std::int64_t have = 1;
        while (have < rel) {
            std::int64_t next = std::min(rel, 2 * have);
            Puiseux ahat = snapshot(trunc_rel(a, next));
            y = snapshot(trunc_rel(y + y * (one_ - ahat * y), next));
            have = next;
        }
        y.prec = -a.lo + rel;
        y.normalize();
        return y;
    }

    friend Puiseux operator/(const Puiseux& a, const Puiseux& b) {
        if (!b.is_nonzero()) throw DivisionByZeroAtPrecision("division: divisor has no certified nonzero digit");
        if (b.c.size() == 1 || b.prec != EXACT) return a * inv(b);
        // Exact non-monomial divisor: the dividend's relative precision sets the target.
        if (a.prec != EXACT) {
            std::int64_t rel = a.is_nonzero() ? a.prec - a.lo : 1;
            return a * inv_to(b, rel);
        }
        throw Error("division: exact/exact needs a target precision (div_to)");
    }

    // a / b with `rel` certified slots past the leading term of the result.
    friend Puiseux div_to(const Puiseux& a, const Puiseux& b, std::int64_t rel) {
        return a * inv_to(b, rel);
    }

    // Drop digits more than `rel` slots past the leading term.
    friend Puiseux trunc_rel(const Puiseux& a, std::int64_t rel) {
        if (!a.is_nonzero()) return a;
        Puiseux r = a;
        r.prec = std::min(r.prec == EXACT ? a.lo + rel : r.prec, a.lo + rel);
        r.normalize();
        return r;
    }

    // Cap the absolute precision at `slots` (in units of 1/ram_e).
    friend Puiseux trunc_abs(const Puiseux& a, std::int64_t slots, std::int64_t ram_e) {
        Puiseux r = a;
        if (r.e != ram_e) {
            std::int64_t l = std::lcm(r.e, ram_e);
            r = rescale(r, l / r.e);
            slots *= l / ram_e;
        }
        r.prec = std::min(r.prec, slots);
        r.normalize();
        return r;
    }

    Puiseux pow_int(std::int64_t n) const {
        if (n < 0) return inv(*this).pow_int(-n);
        Puiseux r = Puiseux::one(tw);
        Puiseux base = *this;
        std::int64_t m = n;
        while (m) {
            if (m & 1) r = r * base;
            if (m >>= 1) base = base * base;
        }
        return r;
    }

    // Comparison at the joint precision. Returns true when a - b has no
    // certified nonzero digit (exact zero or zero at precision).
    friend bool eq_at_prec(const Puiseux& a, const Puiseux& b) { return !(a - b).is_nonzero(); }
    friend bool eq_exact(const Puiseux& a, const Puiseux& b) { return (a - b).is_exact_zero(); }

    // v_inf lower bound of a - b; EXACT-equal pairs report +infinity sentinel.
    friend Rational residual_val(const Puiseux& a, const Puiseux& b) { return (a - b).val_lower(); }

    std::string str() const;

private:
    static Puiseux rescale(const Puiseux& a, std::int64_t f) {
        if (f == 1) return a;
        Puiseux r;
        r.tw = a.tw; r.stage = a.stage;
        r.e = a.e * f;
        r.lo = a.lo * f;
        r.prec = a.prec == EXACT ? EXACT : a.prec * f;
        if (!a.c.empty()) {
            r.c.assign((a.c.size() - 1) * static_cast<std::size_t>(f) + 1, 0);
            for (std::size_t i = 0; i < a.c.size(); ++i) r.c[i * static_cast<std::size_t>(f)] = a.c[i];
        }
        return r;
    }

    static void align(Puiseux& a, Puiseux& b) {
        if (a.tw == nullptr || b.tw == nullptr) throw Error("Puiseux: uninitialised operand");
        if (a.e != b.e) {
            std::int64_t l = std::lcm(a.e, b.e);
            a = rescale(a, l / a.e);
            b = rescale(b, l / b.e);
        }
        int st = std::max(a.stage, b.stage);
        a.stage = st; b.stage = st;
    }

    static Puiseux add_impl(const Puiseux& a0, const Puiseux& b0, bool subtract) {
        Puiseux a = a0, b = b0;
        align(a, b);
        Puiseux r;
        r.tw = a.tw; r.stage = a.stage; r.e = a.e;
        r.prec = std::min(a.prec, b.prec);
        auto hi = [](const Puiseux& v) { return v.lo + static_cast<std::int64_t>(v.c.size()); };
        std::int64_t rlo = std::min(a.c.empty() ? 0 : a.lo, b.c.empty() ? 0 : b.lo);
        if (a.c.empty() && b.c.empty()) { r.normalize(); return r; }
        if (a.c.empty()) rlo = b.lo;
        else if (b.c.empty()) rlo = a.lo;
        std::int64_t rhi = std::max(a.c.empty() ? rlo : hi(a), b.c.empty() ? rlo : hi(b));
        if (r.prec != EXACT) rhi = std::min(rhi, r.prec);
        if (rhi <= rlo) { r.normalize(); return r; }
        r.lo = rlo;
        r.c.assign(static_cast<std::size_t>(rhi - rlo), 0);
        const Tower& T = *r.tw;
        for (std::size_t i = 0; i < a.c.size(); ++i) {
            std::int64_t s = a.lo + static_cast<std::int64_t>(i);
            if (s >= rhi) break;
            r.c[static_cast<std::size_t>(s - rlo)] = a.c[i];
        }
        for (std::size_t i = 0; i < b.c.size(); ++i) {
            std::int64_t s = b.lo + static_cast<std::int64_t>(i);
            if (s >= rhi) break;
            std::size_t k = static_cast<std::size_t>(s - rlo);
            std::uint32_t v = subtract ? T.neg(r.stage, b.c[i]) : b.c[i];
            r.c[k] = T.add(r.stage, r.c[k], v);
        }
        r.normalize();
        return r;
    }

    void reduce_ram() {
        if (e == 1) return;
        std::int64_t g = e;
        auto acc = [&g](std::int64_t v) { g = std::gcd(g, v < 0 ? -v : v); };
        if (prec != EXACT) acc(prec);
        if (!c.empty()) {
            acc(lo);
            for (std::size_t i = 0; i < c.size() && g > 1; ++i)
                if (c[i]) acc(lo + static_cast<std::int64_t>(i));
        }
        if (g <= 1) return;
        e /= g;
        if (prec != EXACT) prec /= g;
        if (!c.empty()) {
            lo /= g;
            std::vector<std::uint32_t> nc((c.size() - 1) / static_cast<std::size_t>(g) + 1, 0);
            for (std::size_t i = 0; i < c.size(); i += static_cast<std::size_t>(g)) nc[i / static_cast<std::size_t>(g)] = c[i];
            c = std::move(nc);
        } else {
            lo = 0;
        }
    }
};

// theta^{q^i} - theta^{q^j}, i > j >= 0. Exact, valuation -q^i.
inline Puiseux theta_diff(const TowerPtr& tw, int i, int j) {
    if (i <= j || j < 0) throw Error("theta_diff: need i > j >= 0");
    std::int64_t qi = 1, qj = 1;
    for (int t = 0; t < i; ++t) qi *= tw->q();
    for (int t = 0; t < j; ++t) qj *= tw->q();
    Puiseux a = Puiseux::monomial(tw, 0, 1, -qi, 1);
    Puiseux b = Puiseux::monomial(tw, 0, 1, -qj, 1);
    return a - b;
}

inline std::string Puiseux::str() const {
    if (is_exact_zero()) return "0";
    std::string out;
    auto tpow = [this](std::int64_t slot) {
        if (e == 1) return "t^(" + std::to_string(slot) + ")";
        return "t^(" + std::to_string(slot) + "/" + std::to_string(e) + ")";
    };
    bool first = true;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (!c[i]) continue;
        if (!first) out += " + ";
        out += tw->format(stage, c[i]) + "*" + tpow(lo + static_cast<std::int64_t>(i));
        first = false;
    }
    if (prec != EXACT) {
        if (!first) out += " + ";
        out += "O(" + tpow(prec) + ")";
    }
    return out;
}

// Parses the canonical form produced by Puiseux::str (and bare field
// elements / "0" as conveniences). Round-trips bit-exactly.
inline Puiseux parse_puiseux(const TowerPtr& tw, const std::string& text) {
    if (text == "0") return Puiseux::zero(tw, 0);
    struct Term { int stage; std::uint32_t idx; std::int64_t num; std::int64_t den; bool omarker; };
    std::vector<Term> terms;
    std::size_t pos = 0;
    auto parse_tpow = [&](const std::string& part, std::size_t at, std::int64_t& num, std::int64_t& den) {
        if (part.compare(at, 3, "t^(") != 0) throw ParseError("expected t^( in: " + part);
        std::size_t close = part.find(')', at);
        if (close == std::string::npos || close + 1 != part.size()) throw ParseError("bad exponent in: " + part);
        std::string inner = part.substr(at + 3, close - at - 3);
        std::size_t slash = inner.find('/');
        num = std::stoll(slash == std::string::npos ? inner : inner.substr(0, slash));
        den = slash == std::string::npos ? 1 : std::stoll(inner.substr(slash + 1));
        if (den <= 0) throw ParseError("bad ramification in: " + part);
    };
    while (pos < text.size()) {
        std::size_t next = text.find(" + ", pos);
        std::string part = text.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
        pos = next == std::string::npos ? text.size() : next + 3;
        if (part.empty()) throw ParseError("empty term in series literal");
        Term t{};
        if (part.rfind("O(", 0) == 0) {
            if (part.back() != ')') throw ParseError("bad O(...) marker: " + part);
            std::string inner = part.substr(2, part.size() - 3);
            std::int64_t num, den;
            parse_tpow(inner, 0, num, den);
            t.omarker = true; t.num = num; t.den = den; t.stage = 0; t.idx = 0;
            terms.push_back(t);
            if (pos < text.size()) throw ParseError("O(...) must be the last term");
            continue;
        }
        std::size_t star = part.find("*t^(");
        if (star == std::string::npos) {
            auto [st, idx] = tw->parse(part);
            terms.push_back({st, idx, 0, 1, false});
        } else {
            auto [st, idx] = tw->parse(part.substr(0, star));
            std::int64_t num, den;
            parse_tpow(part, star + 1, num, den);
            terms.push_back({st, idx, num, den, false});
        }
    }
    std::int64_t e = 1;
    for (const auto& t : terms) e = std::lcm(e, t.den);
    Puiseux r = Puiseux::zero(tw, 0);
    r.e = e;
    bool have_o = false;
    std::int64_t oslot = 0;
    int stage = 0;
    for (const auto& t : terms) {
        if (t.omarker) { have_o = true; oslot = t.num * (e / t.den); continue; }
        stage = std::max(stage, t.stage);
        r = r + Puiseux::monomial(tw, t.stage, e, t.num * (e / t.den), t.idx);
    }
    if (have_o) {
        Puiseux cap = Puiseux::zero_at(tw, stage, e, oslot);
        r = r + cap;
    }
    return r;
}

struct RankCert {
    int rank = 0;
    bool exact = false;          // leftover entries were exact zeros
    Rational certified_below;    // valuation bound certifying the leftover zeros
};

// Rank over R_inf = F_q((theta^{-1})) of a family of vectors with entries in
// F_{q^k}((theta^{-1/e})). Each entry decomposes along the R_inf-basis
// { b_s * t^r : s < k, r < e } with b_s the F_q-digit basis of the top stage;
// the component series have F_q coefficients and integer slots, and the rank
// is computed by valuation-pivoted elimination over those Laurent series.
// Throws InsufficientPrecision if a leftover undecided entry has fewer than
// `floor_slots` certified zero slots.
inline RankCert r_infinity_rank(std::vector<std::vector<Puiseux>> rows, std::int64_t floor_slots = 1) {
    if (rows.empty()) return {0, true, Rational(std::numeric_limits<std::int32_t>::max())};
    TowerPtr tw = rows[0][0].tw;
    const int top = tw->top();
    int qst = tw->q_stage();
    std::int64_t e = 1;
    for (auto& row : rows)
        for (auto& x : row) e = std::lcm(e, x.e);
    int kdig = tw->stage(top).deg_fp / tw->e0();

    auto floordiv = [](std::int64_t a, std::int64_t b) {
        return a >= 0 ? a / b : -((-a + b - 1) / b);
    };
    auto cdiv = [&floordiv](std::int64_t a, std::int64_t b) { return floordiv(a + b - 1, b); };

    // Decompose one scalar into k*e component Laurent series over F_q.
    // A slot s at ramification x.e sits at common slot s*f, f = e/x.e.
    auto decompose = [&](const Puiseux& x) {
        std::int64_t f = e / x.e;
        std::int64_t xprec = x.prec == Puiseux::EXACT ? Puiseux::EXACT : x.prec * f;
        std::vector<Puiseux> comps;
        comps.reserve(static_cast<std::size_t>(kdig) * static_cast<std::size_t>(e));
        for (int s = 0; s < kdig; ++s) {
            for (std::int64_t rres = 0; rres < e; ++rres) {
                Puiseux comp = Puiseux::zero(tw, qst);
                comp.e = 1;
                comp.prec = xprec == Puiseux::EXACT ? Puiseux::EXACT : cdiv(xprec - rres, e);
                std::vector<std::uint32_t> cc;
                std::int64_t clo = 0;
                bool started = false;
                for (std::size_t i = 0; i < x.c.size(); ++i) {
                    std::int64_t slot = (x.lo + static_cast<std::int64_t>(i)) * f;
                    std::int64_t m = slot - rres;
                    if (m % e != 0) continue;
                    std::uint32_t digit = tw->coords_fq(top, x.c[i])[static_cast<std::size_t>(s)];
                    if (!started) {
                        if (digit == 0) continue;
                        started = true; clo = m / e; cc.push_back(digit);
                    } else {
                        std::int64_t want = clo + static_cast<std::int64_t>(cc.size());
                        while (want < m / e) { cc.push_back(0); ++want; }
                        cc.push_back(digit);
                    }
                }
                comp.lo = clo; comp.c = std::move(cc);
                comp.normalize();
                comps.push_back(std::move(comp));
            }
        }
        return comps;
    };

    std::vector<std::vector<Puiseux>> m;
    for (auto& row : rows) {
        std::vector<Puiseux> mr;
        for (auto& x : row) {
            auto comps = decompose(x);
            mr.insert(mr.end(), comps.begin(), comps.end());
        }
        m.push_back(std::move(mr));
    }

    int rank = 0;
    std::vector<bool> used(m.size(), false);
    std::size_t ncols = m[0].size();
    std::vector<bool> usedcol(ncols, false);
    for (;;) {
        int pr = -1; std::size_t pc = 0;
        Rational best(0);
        bool found = false;
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (used[i]) continue;
            for (std::size_t j = 0; j < ncols; ++j) {
                if (usedcol[j] || !m[i][j].is_nonzero()) continue;
                Rational v = m[i][j].val();
                if (!found || v < best) { found = true; best = v; pr = static_cast<int>(i); pc = j; }
            }
        }
        if (!found) break;
        ++rank;
        used[static_cast<std::size_t>(pr)] = true;
        usedcol[pc] = true;
        Puiseux piv = m[static_cast<std::size_t>(pr)][pc];
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (used[i] || !m[i][pc].is_nonzero()) continue;
            Puiseux f = m[i][pc] / piv;
            for (std::size_t j = 0; j < ncols; ++j)
                m[i][j] = m[i][j] - f * m[static_cast<std::size_t>(pr)][j];
        }
    }

    RankCert cert;
    cert.rank = rank;
    cert.exact = true;
    cert.certified_below = Rational(std::numeric_limits<std::int32_t>::max());
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (used[i]) continue;
        for (std::size_t j = 0; j < ncols; ++j) {
            const Puiseux& x = m[i][j];
            if (x.is_exact_zero()) continue;
            cert.exact = false;
            if (x.prec - 0 < floor_slots)
                throw InsufficientPrecision("r_infinity_rank: undecided entry certified only below slot " +
                                            std::to_string(x.prec));
            Rational b(x.prec, 1);
            if (b < cert.certified_below) cert.certified_below = b;
        }
    }
    return cert;
}

// True when x equals a constant of the given subfield stage at precision.
// Returns the constant through `out` when nonzero.
inline bool is_subfield_constant(const Puiseux& x, int sub_stage, FF* out = nullptr) {
    if (x.prec != Puiseux::EXACT && x.prec <= 0)
        throw InsufficientPrecision("is_subfield_constant: precision does not reach slot 0");
    if (x.is_exact_zero() || x.is_zero_at_prec()) {
        if (out) *out = FF(x.tw, sub_stage, 0);
        return true;
    }
    for (std::size_t i = 0; i < x.c.size(); ++i) {
        std::int64_t slot = x.lo + static_cast<std::int64_t>(i);
        if (x.c[i] && slot != 0) return false;
    }
    std::uint32_t c0 = x.coeff_at_slot(0);
    if (!x.tw->in_subfield(x.stage, c0, sub_stage)) return false;
    if (out) *out = FF(x.tw, sub_stage, c0);
    return true;
}

} // namespace tmotive

#endif
