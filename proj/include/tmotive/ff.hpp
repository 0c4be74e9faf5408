#ifndef TMOTIVE_FF_HPP
#define TMOTIVE_FF_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "tmotive/errors.hpp"

namespace tmotive {

// Tower of finite fields F_p < F_q < F_{q^2} [< F_{q^4}], q = p^e0.
//
// Each stage is an explicit quotient (prev stage)[x]/(g) where g is the
// lexicographically first irreducible monic polynomial of the required
// degree; coefficient tuples (c_0,...,c_{d-1}) are compared in index order,
// c_0 most significant. Stage construction is therefore deterministic.
//
// Elements are stored as dense indices 0..size-1: an element with digits
// (c_0,...,c_{d-1}) over the previous stage has index sum c_i * prev_size^i.
// The embedding of a stage into any later stage is the identity on indices
// (constant polynomials), so the subfield of size N_s inside a later stage
// is exactly the index range [0, N_s).
//
// Multiplication, inversion and Frobenius run on discrete log tables per
// stage; addition is coordinate-wise over F_p on precomputed flat vectors.
class Tower {
public:
    struct Stage {
        std::uint32_t size = 0;      // p^deg_fp
        int deg_prev = 1;            // degree over the previous stage
        int deg_fp = 1;              // degree over F_p
        std::vector<std::uint32_t> modulus;   // monic, coeffs over prev stage, length deg_prev+1
        std::uint32_t gen = 0;                // generator of the multiplicative group
        std::vector<std::uint32_t> exp;       // exp[i] = gen^i, i in [0, size-1)
        std::vector<std::uint32_t> log;       // log[x] for x != 0, log[0] unused
        std::vector<std::uint8_t> flat;       // element -> F_p coordinates, size*deg_fp
        std::vector<std::uint32_t> frob;      // x -> x^q
    };

    // q must be a prime power; levels is the number of extension steps of
    // degree 2 built on top of F_q (1 gives F_{q^2}, 2 gives F_{q^4}).
    static std::shared_ptr<const Tower> make(std::uint32_t q, int levels = 1) {
        auto tw = std::shared_ptr<Tower>(new Tower());
        tw->build(q, levels);
        return tw;
    }

    int p() const { return p_; }
    int e0() const { return e0_; }
    std::uint32_t q() const { return q_; }
    int stages() const { return static_cast<int>(st_.size()); }
    int top() const { return stages() - 1; }
    int q_stage() const { return q_stage_; }
    int q2_stage() const { return q_stage_ + 1; }
    const Stage& stage(int s) const { return st_[static_cast<std::size_t>(s)]; }
    std::uint32_t size(int s) const { return stage(s).size; }
    // omega: the adjoined generator of F_{q^2} over F_q (class of x).
    std::uint32_t omega_idx() const { return q_; }

    int stage_of_size(std::uint64_t n) const {
        for (int s = 0; s < stages(); ++s)
            if (st_[static_cast<std::size_t>(s)].size == n) return s;
        throw Error("Tower: no stage of size " + std::to_string(n));
    }

    std::uint32_t add(int s, std::uint32_t a, std::uint32_t b) const {
        const Stage& S = stage(s);
        std::uint32_t r = 0, mul = 1;
        const std::uint8_t* fa = &S.flat[static_cast<std::size_t>(a) * S.deg_fp];
        const std::uint8_t* fb = &S.flat[static_cast<std::size_t>(b) * S.deg_fp];
        for (int i = 0; i < S.deg_fp; ++i) {
            r += mul * static_cast<std::uint32_t>((fa[i] + fb[i]) % p_);
            mul *= static_cast<std::uint32_t>(p_);
        }
        return r;
    }

    std::uint32_t neg(int s, std::uint32_t a) const {
        const Stage& S = stage(s);
        std::uint32_t r = 0, mul = 1;
        const std::uint8_t* fa = &S.flat[static_cast<std::size_t>(a) * S.deg_fp];
        for (int i = 0; i < S.deg_fp; ++i) {
            r += mul * static_cast<std::uint32_t>((p_ - fa[i]) % p_);
            mul *= static_cast<std::uint32_t>(p_);
        }
        return r;
    }

    std::uint32_t sub(int s, std::uint32_t a, std::uint32_t b) const { return add(s, a, neg(s, b)); }

    std::uint32_t mul(int s, std::uint32_t a, std::uint32_t b) const {
        if (a == 0 || b == 0) return 0;
        const Stage& S = stage(s);
        std::uint64_t e = static_cast<std::uint64_t>(S.log[a]) + S.log[b];
        std::uint64_t ord = S.size - 1;
        if (e >= ord) e -= ord;
        return S.exp[e];
    }

    std::uint32_t inv(int s, std::uint32_t a) const {
        if (a == 0) throw Error("Tower: inverse of zero");
        const Stage& S = stage(s);
        std::uint64_t ord = S.size - 1;
        return S.exp[(ord - S.log[a]) % ord];
    }

    std::uint32_t pow(int s, std::uint32_t a, std::uint64_t n) const {
        if (a == 0) return n == 0 ? 1u : 0u;
        const Stage& S = stage(s);
        std::uint64_t ord = S.size - 1;
        std::uint64_t e = (static_cast<std::uint64_t>(S.log[a]) * (n % ord)) % ord;
        return S.exp[e];
    }

    // a^{q^j}; j may be any nonnegative integer.
    std::uint32_t frob(int s, std::uint32_t a, std::uint64_t j) const {
        const Stage& S = stage(s);
        if (a == 0) return 0;
        // q^j mod (size-1) on the discrete log.
        std::uint64_t ord = S.size - 1;
        std::uint64_t f = 1;
        std::uint64_t base = q_ % ord;
        std::uint64_t jj = j;
        while (jj) {
            if (jj & 1) f = (f * base) % ord;
            base = (base * base) % ord;
            jj >>= 1;
        }
        return S.exp[(static_cast<std::uint64_t>(S.log[a]) * f) % ord];
    }

    // a^{q^-j}: inverse Frobenius (unique q^j-th root).
    std::uint32_t unfrob(int s, std::uint32_t a, std::uint64_t j) const {
        const Stage& S = stage(s);
        if (a == 0) return 0;
        // q is invertible mod size-1 because gcd(q, p^deg - 1) = 1.
        std::uint64_t ord = S.size - 1;
        std::uint64_t qinv = mod_inverse(q_ % ord, ord);
        std::uint64_t f = 1;
        std::uint64_t jj = j;
        std::uint64_t base = qinv;
        while (jj) {
            if (jj & 1) f = (f * base) % ord;
            base = (base * base) % ord;
            jj >>= 1;
        }
        return S.exp[(static_cast<std::uint64_t>(S.log[a]) * f) % ord];
    }

    // Membership of a stage-s element in the subfield of stage t <= s.
    bool in_subfield(int s, std::uint32_t a, int t) const {
        if (t >= s) return true;
        return a < size(t);
    }

    std::vector<std::uint8_t> coords_fp(int s, std::uint32_t a) const {
        const Stage& S = stage(s);
        return {S.flat.begin() + static_cast<std::ptrdiff_t>(a) * S.deg_fp,
                S.flat.begin() + static_cast<std::ptrdiff_t>(a + 1) * S.deg_fp};
    }

    std::uint32_t from_coords_fp(int s, const std::vector<std::uint8_t>& c) const {
        const Stage& S = stage(s);
        if (static_cast<int>(c.size()) != S.deg_fp) throw Error("Tower: bad coordinate length");
        std::uint32_t r = 0, mul = 1;
        for (int i = 0; i < S.deg_fp; ++i) {
            r += mul * static_cast<std::uint32_t>(c[static_cast<std::size_t>(i)] % p_);
            mul *= static_cast<std::uint32_t>(p_);
        }
        return r;
    }

    // Digits of a stage-s element over the F_q stage (base q expansion of the
    // index). Valid because every stage above F_q is built by repeated
    // quadratic extensions starting from F_q.
    std::vector<std::uint32_t> coords_fq(int s, std::uint32_t a) const {
        int d = stage(s).deg_fp / e0_;
        std::vector<std::uint32_t> out(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i) { out[static_cast<std::size_t>(i)] = a % q_; a /= q_; }
        return out;
    }

    std::string format(int s, std::uint32_t a) const {
        std::string out = "F" + std::to_string(size(s)) + ":[";
        auto c = coords_fp(s, a);
        for (std::size_t i = 0; i < c.size(); ++i) {
            if (i) out += ",";
            out += std::to_string(static_cast<int>(c[i]));
        }
        out += "]";
        return out;
    }

    // Parses "F<size>:[c0,c1,...]"; returns (stage, index).
    std::pair<int, std::uint32_t> parse(const std::string& text) const {
        if (text.empty() || text[0] != 'F') throw ParseError("field element must start with 'F': " + text);
        std::size_t colon = text.find(':');
        if (colon == std::string::npos) throw ParseError("missing ':' in field element: " + text);
        std::uint64_t n = 0;
        for (std::size_t i = 1; i < colon; ++i) {
            if (text[i] < '0' || text[i] > '9') throw ParseError("bad field size in: " + text);
            n = n * 10 + static_cast<std::uint64_t>(text[i] - '0');
        }
        int s = stage_of_size(n);
        if (colon + 1 >= text.size() || text[colon + 1] != '[' || text.back() != ']')
            throw ParseError("missing coordinate list in: " + text);
        std::vector<std::uint8_t> coords;
        std::uint32_t cur = 0;
        bool have = false;
        for (std::size_t i = colon + 2; i + 1 <= text.size() - 1; ++i) {
            char ch = text[i];
            if (ch == ',') {
                if (!have) throw ParseError("empty coordinate in: " + text);
                coords.push_back(static_cast<std::uint8_t>(cur));
                cur = 0; have = false;
            } else if (ch >= '0' && ch <= '9') {
                cur = cur * 10 + static_cast<std::uint32_t>(ch - '0');
                if (cur >= static_cast<std::uint32_t>(p_)) throw ParseError("coordinate out of range in: " + text);
                have = true;
            } else {
                throw ParseError("bad character in field element: " + text);
            }
        }
        if (have) coords.push_back(static_cast<std::uint8_t>(cur));
        if (static_cast<int>(coords.size()) != stage(s).deg_fp)
            throw ParseError("wrong coordinate count for F" + std::to_string(n));
        return {s, from_coords_fp(s, coords)};
    }

private:
    Tower() = default;

    int p_ = 0;
    int e0_ = 0;
    std::uint32_t q_ = 0;
    int q_stage_ = 0;
    std::vector<Stage> st_;

    static std::uint64_t mod_inverse(std::uint64_t a, std::uint64_t m) {
        std::int64_t t = 0, nt = 1;
        std::int64_t r = static_cast<std::int64_t>(m), nr = static_cast<std::int64_t>(a % m);
        while (nr != 0) {
            std::int64_t qq = r / nr;
            std::int64_t tmp = t - qq * nt; t = nt; nt = tmp;
            tmp = r - qq * nr; r = nr; nr = tmp;
        }
        if (r != 1) throw Error("Tower: not invertible in modular inverse");
        if (t < 0) t += static_cast<std::int64_t>(m);
        return static_cast<std::uint64_t>(t);
    }

    void build(std::uint32_t q, int levels) {
        // factor q = p^e0
        std::uint32_t p = 0;
        for (std::uint32_t d = 2; d * d <= q; ++d)
            if (q % d == 0) { p = d; break; }
        if (p == 0) p = q;
        std::uint32_t v = q;
        int e0 = 0;
        while (v % p == 0) { v /= p; ++e0; }
        if (v != 1 || q < 2) throw Error("Tower: q must be a prime power");
        p_ = static_cast<int>(p);
        e0_ = e0;
        q_ = q;

        build_prime_stage();
        if (e0_ > 1) extend(e0_);
        q_stage_ = top();
        for (int i = 0; i < levels; ++i) extend(2);

        if (size(top()) > (1u << 24)) throw Error("Tower: field too large");
    }

    void build_prime_stage() {
        Stage S;
        S.size = static_cast<std::uint32_t>(p_);
        S.deg_prev = 1;
        S.deg_fp = 1;
        S.flat.resize(S.size);
        for (std::uint32_t i = 0; i < S.size; ++i) S.flat[i] = static_cast<std::uint8_t>(i);
        st_.push_back(std::move(S));
        finish_tables(0, [this](std::uint32_t a, std::uint32_t b) {
            return static_cast<std::uint32_t>((static_cast<std::uint64_t>(a) * b) % static_cast<std::uint32_t>(p_));
        });
    }

    // Polynomial helpers over stage s, coefficient vectors little-endian.
    std::vector<std::uint32_t> poly_mul(int s, const std::vector<std::uint32_t>& a,
                                        const std::vector<std::uint32_t>& b) const {
        std::vector<std::uint32_t> r(a.size() + b.size() - 1, 0);
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < b.size(); ++j)
                r[i + j] = add(s, r[i + j], mul(s, a[i], b[j]));
        return r;
    }

    // Remainder of a modulo monic m over stage s.
    std::vector<std::uint32_t> poly_rem(int s, std::vector<std::uint32_t> a,
                                        const std::vector<std::uint32_t>& m) const {
        std::size_t dm = m.size() - 1;
        while (a.size() > dm) {
            std::uint32_t lead = a.back();
            std::size_t shift = a.size() - 1 - dm;
            if (lead != 0)
                for (std::size_t i = 0; i <= dm; ++i)
                    a[shift + i] = sub(s, a[shift + i], mul(s, lead, m[i]));
            a.pop_back();
        }
        while (!a.empty() && a.back() == 0) a.pop_back();
        return a;
    }

    bool poly_is_irreducible(int s, const std::vector<std::uint32_t>& g) const {
        std::size_t d = g.size() - 1;
        // Trial division by all monic polynomials of degree 1..d/2.
        std::uint64_t n = size(s);
        for (std::size_t dd = 1; dd * 2 <= d; ++dd) {
            std::uint64_t count = 1;
            for (std::size_t i = 0; i < dd; ++i) count *= n;
            for (std::uint64_t t = 0; t < count; ++t) {
                std::vector<std::uint32_t> div(dd + 1, 0);
                std::uint64_t tt = t;
                for (std::size_t i = 0; i < dd; ++i) { div[i] = static_cast<std::uint32_t>(tt % n); tt /= n; }
                div[dd] = 1;
                if (poly_rem(s, g, div).empty()) return false;
            }
        }
        return true;
    }

    void extend(int degree) {
        int s = top();
        std::uint64_t n = size(s);

        // Lexicographically first irreducible monic polynomial of the degree,
        // coefficients compared in index order with c_0 most significant.
        std::vector<std::uint32_t> g;
        std::vector<std::uint32_t> c(static_cast<std::size_t>(degree), 0);
        for (;;) {
            std::vector<std::uint32_t> cand(c.begin(), c.end());
            cand.push_back(1);
            if (poly_is_irreducible(s, cand)) { g = cand; break; }
            int i = degree - 1;
            while (i >= 0) {
                if (++c[static_cast<std::size_t>(i)] < n) break;
                c[static_cast<std::size_t>(i)] = 0;
                --i;
            }
            if (i < 0) throw Error("Tower: no irreducible polynomial found");
        }

        Stage S;
        S.deg_prev = degree;
        S.deg_fp = stage(s).deg_fp * degree;
        S.size = 1;
        for (int i = 0; i < degree; ++i) S.size *= static_cast<std::uint32_t>(n);
        S.modulus = g;
        S.flat.resize(static_cast<std::size_t>(S.size) * S.deg_fp);
        for (std::uint32_t a = 0; a < S.size; ++a) {
            std::uint32_t aa = a;
            for (int i = 0; i < degree; ++i) {
                std::uint32_t digit = aa % static_cast<std::uint32_t>(n);
                aa /= static_cast<std::uint32_t>(n);
                auto fc = coords_fp(s, digit);
                for (int j = 0; j < stage(s).deg_fp; ++j)
                    S.flat[static_cast<std::size_t>(a) * S.deg_fp + i * stage(s).deg_fp + j] = fc[static_cast<std::size_t>(j)];
            }
        }
        int ns = s + 1;
        st_.push_back(std::move(S));

        std::uint64_t nn = n;
        auto digits = [nn, degree](std::uint32_t a) {
            std::vector<std::uint32_t> d(static_cast<std::size_t>(degree));
            for (int i = 0; i < degree; ++i) { d[static_cast<std::size_t>(i)] = static_cast<std::uint32_t>(a % nn); a = static_cast<std::uint32_t>(a / nn); }
            while (!d.empty() && d.back() == 0) d.pop_back();
            return d;
        };
        auto from_digits = [nn](const std::vector<std::uint32_t>& d) {
            std::uint64_t r = 0, mul = 1;
            for (std::size_t i = 0; i < d.size(); ++i) { r += d[i] * mul; mul *= nn; }
            return static_cast<std::uint32_t>(r);
        };
        const std::vector<std::uint32_t> mod = st_[static_cast<std::size_t>(ns)].modulus;
        finish_tables(ns, [this, s, digits, from_digits, mod](std::uint32_t a, std::uint32_t b) {
            if (a == 0 || b == 0) return 0u;
            auto pa = digits(a), pb = digits(b);
            return from_digits(poly_rem(s, poly_mul(s, pa, pb), mod));
        });
    }

    template <typename Mul>
    void finish_tables(int s, Mul&& slow_mul) {
        Stage& S = st_[static_cast<std::size_t>(s)];
        std::uint64_t ord = S.size - 1;

        std::vector<std::uint64_t> prime_factors;
        std::uint64_t m = ord;
        for (std::uint64_t d = 2; d * d <= m; ++d)
            if (m % d == 0) { prime_factors.push_back(d); while (m % d == 0) m /= d; }
        if (m > 1) prime_factors.push_back(m);

        auto slow_pow = [&](std::uint32_t a, std::uint64_t n) {
            std::uint32_t r = 1;
            while (n) {
                if (n & 1) r = slow_mul(r, a);
                a = slow_mul(a, a);
                n >>= 1;
            }
            return r;
        };

        std::uint32_t gen = 0;
        for (std::uint32_t cand = 1; cand < S.size; ++cand) {
            bool ok = true;
            for (std::uint64_t f : prime_factors)
                if (slow_pow(cand, ord / f) == 1) { ok = false; break; }
            if (ok) { gen = cand; break; }
        }
        if (gen == 0 && ord > 1) throw Error("Tower: no generator found");
        if (ord == 1) gen = 1;
        S.gen = gen;

        S.exp.resize(ord);
        S.log.assign(S.size, 0);
        std::uint32_t cur = 1;
        for (std::uint64_t i = 0; i < ord; ++i) {
            S.exp[i] = cur;
            S.log[cur] = static_cast<std::uint32_t>(i);
            cur = slow_mul(cur, gen);
        }
        if (cur != 1) throw Error("Tower: generator order mismatch");

        S.frob.resize(S.size);
        for (std::uint32_t a = 0; a < S.size; ++a) S.frob[a] = slow_pow(a, q_);
    }
};

using TowerPtr = std::shared_ptr<const Tower>;

// Field element as a value type. Arithmetic coerces operands to the larger
// stage (embedding is the identity on indices).
struct FF {
    TowerPtr tw;
    int stage = 0;
    std::uint32_t idx = 0;

    FF() = default;
    FF(TowerPtr t, int s, std::uint32_t i) : tw(std::move(t)), stage(s), idx(i) {}

    bool is_zero() const { return idx == 0; }

    static void coerce(FF& a, FF& b) {
        if (a.stage < b.stage) a.stage = b.stage;
        else if (b.stage < a.stage) b.stage = a.stage;
    }

    friend FF operator+(FF a, FF b) { coerce(a, b); return {a.tw, a.stage, a.tw->add(a.stage, a.idx, b.idx)}; }
    friend FF operator-(FF a, FF b) { coerce(a, b); return {a.tw, a.stage, a.tw->sub(a.stage, a.idx, b.idx)}; }
    friend FF operator-(FF a) { return {a.tw, a.stage, a.tw->neg(a.stage, a.idx)}; }
    friend FF operator*(FF a, FF b) { coerce(a, b); return {a.tw, a.stage, a.tw->mul(a.stage, a.idx, b.idx)}; }
    friend FF operator/(FF a, FF b) { coerce(a, b); return {a.tw, a.stage, a.tw->mul(a.stage, a.idx, a.tw->inv(a.stage, b.idx))}; }
    friend bool operator==(const FF& a, const FF& b) { return a.idx == b.idx; }
    friend bool operator!=(const FF& a, const FF& b) { return a.idx != b.idx; }

    FF frob(std::uint64_t j = 1) const { return {tw, stage, tw->frob(stage, idx, j)}; }
    FF inv() const { return {tw, stage, tw->inv(stage, idx)}; }
    bool in_subfield(int t) const { return tw->in_subfield(stage, idx, t); }
    std::string str() const { return tw->format(stage, idx); }
};

inline FF ff_omega(const TowerPtr& tw) { return {tw, tw->q2_stage(), tw->omega_idx()}; }
inline FF ff_one(const TowerPtr& tw, int stage) { return {tw, stage, 1}; }
inline FF ff_zero(const TowerPtr& tw, int stage) { return {tw, stage, 0}; }

} // namespace tmotive

#endif
