#ifndef TMOTIVE_ELIM_HPP
#define TMOTIVE_ELIM_HPP

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "tmotive/motive.hpp"

namespace tmotive {

// Polynomial in a central variable T with Puiseux coefficients; c[j]
// multiplies T^j. The twist acts on coefficients only, T is fixed.
struct TPoly {
    TowerPtr tw;
    std::vector<Puiseux> c;

    static TPoly zero(TowerPtr tw) { return {std::move(tw), {}}; }
    static TPoly constant(const Puiseux& x) { return {x.tw, {x}}; }
    // T - x
    static TPoly t_minus(const Puiseux& x) { return {x.tw, {-x, Puiseux::one(x.tw)}}; }

    Puiseux at(std::size_t j) const { return j < c.size() ? c[j] : Puiseux::zero(tw, 0); }
    std::size_t order() const { return c.size(); }

    void trim() {
        while (!c.empty() && c.back().is_exact_zero()) c.pop_back();
    }

    friend TPoly operator+(const TPoly& a, const TPoly& b) {
        TPoly r{a.tw, {}};
        std::size_t n = std::max(a.c.size(), b.c.size());
        r.c.reserve(n);
        for (std::size_t j = 0; j < n; ++j) r.c.push_back(a.at(j) + b.at(j));
        r.trim();
        return r;
    }
    friend TPoly operator-(const TPoly& a, const TPoly& b) {
        TPoly r{a.tw, {}};
        std::size_t n = std::max(a.c.size(), b.c.size());
        r.c.reserve(n);
        for (std::size_t j = 0; j < n; ++j) r.c.push_back(a.at(j) - b.at(j));
        r.trim();
        return r;
    }
    friend TPoly operator*(const TPoly& a, const TPoly& b) {
        if (a.c.empty() || b.c.empty()) return zero(a.tw);
        TPoly r{a.tw, std::vector<Puiseux>(a.c.size() + b.c.size() - 1, Puiseux::zero(a.tw, 0))};
        for (std::size_t i = 0; i < a.c.size(); ++i)
            for (std::size_t j = 0; j < b.c.size(); ++j) r.c[i + j] = r.c[i + j] + a.c[i] * b.c[j];
        r.trim();
        return r;
    }
    friend TPoly operator*(const Puiseux& s, const TPoly& a) {
        TPoly r{a.tw, {}};
        r.c.reserve(a.c.size());
        for (const auto& x : a.c) r.c.push_back(s * x);
        r.trim();
        return r;
    }

    // coefficientwise q^j power
    friend TPoly twist(const TPoly& a, std::uint64_t j) {
        TPoly r{a.tw, {}};
        r.c.reserve(a.c.size());
        for (const auto& x : a.c) r.c.push_back(frob_twist(x, j));
        return r;
    }
    // coefficientwise unique q^j-th root
    friend TPoly untwist(const TPoly& a, std::uint64_t j) {
        TPoly r{a.tw, {}};
        r.c.reserve(a.c.size());
        for (const auto& x : a.c) r.c.push_back(root_twist(x, j));
        return r;
    }

    friend bool eq_at_prec(const TPoly& a, const TPoly& b) {
        std::size_t n = std::max(a.c.size(), b.c.size());
        for (std::size_t j = 0; j < n; ++j)
            if (!eq_at_prec(a.at(j), b.at(j))) return false;
        return true;
    }
    bool vanishes_at_prec() const {
        for (const auto& x : c)
            if (x.is_nonzero()) return false;
        return true;
    }
};

// tau-action matrix on the basis (e1, e2, tau e1) of the rank-3
// two-dimensional family, together with the parameters that built it.
struct QMatrix {
    TowerPtr tw;
    Puiseux a11, a12, a21, d;
    std::array<std::array<TPoly, 3>, 3> Q;
};

struct TSeriesVec {
    TPoly X1, X2, X3;
};

inline QMatrix build_Q(const Puiseux& a11, const Puiseux& a12, const Puiseux& a21) {
    const TowerPtr& tw = a11.tw;
    QMatrix q;
    q.tw = tw;
    q.a11 = a11;
    q.a12 = a12;
    q.a21 = a21;
    q.d = a11 - a12 * a21;
    TPoly z = TPoly::zero(tw);
    TPoly tt = TPoly::t_minus(Puiseux::theta(tw));
    q.Q = {{{z, z, TPoly::constant(Puiseux::one(tw))},
            {z, tt, TPoly::constant(-a21)},
            {tt, TPoly::constant(-a12) * tt, TPoly::constant(-q.d)}}};
    return q;
}

// Reads the tau-action matrix off a rank-3 two-dimensional module by solving
// its defining relation on the basis (e1, e2, tau e1): row 1 solves for
// tau e2, row 2 substitutes it back into the tau^2 e1 relation.
inline QMatrix motive_to_Q(const MotiveSpec& m) {
    if (m.n != 2 || m.r != 3 || m.A.size() != 2)
        throw ShapeError("motive_to_Q: needs the rank-3 two-dimensional shape");
    if (!(m.A[1][0][0] - Puiseux::one(m.tw)).is_exact_zero() || !m.A[1][0][1].is_exact_zero() ||
        !m.A[1][1][0].is_exact_zero() || !m.A[1][1][1].is_exact_zero() ||
        !(m.A[0][1][1] - Puiseux::one(m.tw)).is_exact_zero())
        throw ShapeError("motive_to_Q: second-order coefficients must pin tau^2 e1 alone");
    const TowerPtr& tw = m.tw;
    const Puiseux &a11 = m.A[0][0][0], &a12 = m.A[0][0][1], &a21 = m.A[0][1][0];
    TPoly z = TPoly::zero(tw);
    TPoly tt = TPoly::t_minus(Puiseux::theta(tw));
    QMatrix q;
    q.tw = tw;
    q.a11 = a11;
    q.a12 = a12;
    q.a21 = a21;
    q.d = a11 - a12 * a21;
    // tau f1 = f3 by the choice of basis
    std::array<TPoly, 3> row0{z, z, TPoly::constant(Puiseux::one(tw))};
    // T e2 = theta e2 + a21 tau e1 + tau e2
    std::array<TPoly, 3> row1{z, tt, TPoly::constant(-a21)};
    // T e1 = theta e1 + a11 tau e1 + a12 tau e2 + tau^2 e1, with tau e2 from row 1
    std::array<TPoly, 3> row2;
    for (int j = 0; j < 3; ++j) row2[static_cast<std::size_t>(j)] = TPoly::constant(-a12) * row1[static_cast<std::size_t>(j)];
    row2[0] = row2[0] + tt;
    row2[2] = row2[2] - TPoly::constant(a11);
    q.Q = {{row0, row1, row2}};
    return q;
}

inline std::array<TPoly, 3> residual_system(const QMatrix& q, const TSeriesVec& X) {
    std::array<const TPoly*, 3> xs{&X.X1, &X.X2, &X.X3};
    std::array<TPoly, 3> res{TPoly::zero(q.tw), TPoly::zero(q.tw), TPoly::zero(q.tw)};
    for (std::size_t i = 0; i < 3; ++i) {
        TPoly acc = TPoly::zero(q.tw);
        for (std::size_t j = 0; j < 3; ++j) acc = acc + q.Q[i][j] * (*xs[j]);
        res[i] = acc - twist(*xs[i], 1);
    }
    return res;
}

namespace elimdetail {

// Reciprocal that stays exact on monomials and meters out rel whole
// valuation units otherwise.
inline Puiseux inv_units(const Puiseux& a, std::int64_t rel) {
    if (!a.is_nonzero()) throw ZeroParameter("inv_units: parameter vanishes at precision");
    if (a.prec == Puiseux::EXACT && a.c.size() > 1) return inv_to(a, rel * a.e);
    return inv(a);
}

} // namespace elimdetail

// Completes a free middle coordinate to a vector whose first two residuals
// vanish identically: the third coordinate comes from the middle equation,
// the first is its coefficientwise q-th root.
inline TSeriesVec reconstruct_from_X2(const Puiseux& a21, const TPoly& X2, std::int64_t rel = 96) {
    Puiseux ia = elimdetail::inv_units(a21, rel);
    TPoly X3 = ia * (TPoly::t_minus(Puiseux::theta(X2.tw)) * X2 - twist(X2, 1));
    return {untwist(X3, 1), X2, X3};
}

// One-variable form of the eliminated equation: coefficients of the free
// middle coordinate and its first three twists, with u, v as printed.
struct EliminatedForm {
    Puiseux u, v;       // u = 1/a21 + a12^q + d^q/a21^q, v = d^q/a21^q + theta^{q^2}/a21^{q^2}
    TPoly w3, w2, w1, w0; // T-polynomial weights of X2^{(3)}, X2^{(2)}, X2^{(1)}, X2
};

inline EliminatedForm eliminated_form(const Puiseux& a11, const Puiseux& a12, const Puiseux& a21,
                                      std::int64_t rel = 96) {
    const TowerPtr& tw = a11.tw;
    Puiseux d = a11 - a12 * a21;
    Puiseux ia = elimdetail::inv_units(a21, rel);
    Puiseux iaq = frob_twist(ia, 1);
    Puiseux iaq2 = frob_twist(ia, 2);
    Puiseux th = Puiseux::theta(tw);
    Puiseux dq_over = frob_twist(d, 1) * iaq;
    EliminatedForm f;
    f.u = ia + frob_twist(a12, 1) + dq_over;
    f.v = dq_over + frob_twist(th, 2) * iaq2;
    f.w3 = TPoly::constant(iaq2);
    f.w2 = TPoly{tw, {f.v, -iaq2}};
    f.w1 = TPoly::constant(-f.u) * TPoly::t_minus(frob_twist(th, 1));
    f.w0 = TPoly::constant(ia) * TPoly::t_minus(frob_twist(th, 1)) * TPoly::t_minus(th);
    return f;
}

inline TPoly eliminated_residual(const Puiseux& a11, const Puiseux& a12, const Puiseux& a21,
                                 const TPoly& X2, std::int64_t rel = 96) {
    EliminatedForm f = eliminated_form(a11, a12, a21, rel);
    return f.w3 * twist(X2, 3) + f.w2 * twist(X2, 2) + f.w1 * twist(X2, 1) + f.w0 * X2;
}

struct UVParams {
    Puiseux a21, u, v;
};

// (a11, a12, a21) -> (a21, u, v); bijective while a21 is invertible.
inline UVParams uv_reparam(const Puiseux& a11, const Puiseux& a12, const Puiseux& a21,
                           std::int64_t rel = 96) {
    EliminatedForm f = eliminated_form(a11, a12, a21, rel);
    // the two printed forms of u agree: a12^q + d^q/a21^q = a11^q/a21^q
    Puiseux ia = elimdetail::inv_units(a21, rel);
    Puiseux alt = ia + frob_twist(a11, 1) * frob_twist(ia, 1);
    if ((f.u - alt).is_nonzero())
        throw ContractionFailure("uv_reparam: the two closed forms of u disagree");
    return {a21, f.u, f.v};
}

inline std::array<Puiseux, 3> uv_inverse(const UVParams& p, std::int64_t rel = 96) {
    const Puiseux& a21 = p.a21;
    Puiseux ia = elimdetail::inv_units(a21, rel);
    Puiseux iaq2 = frob_twist(ia, 2);
    Puiseux th = Puiseux::theta(a21.tw);
    Puiseux dq_over = p.v - frob_twist(th, 2) * iaq2;          // d^q / a21^q
    Puiseux a12 = root_twist(p.u - ia - dq_over, 1);
    Puiseux d = root_twist(dq_over * frob_twist(a21, 1), 1);
    Puiseux a11 = d + a12 * a21;
    return {a11, a12, a21};
}

} // namespace tmotive

#endif
