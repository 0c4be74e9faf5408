#ifndef TMOTIVE_MOTIVE_HPP
#define TMOTIVE_MOTIVE_HPP

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "tmotive/linalg.hpp"
#include "tmotive/rational.hpp"

namespace tmotive {

// T-action data: T acts on the column space C_inf^n as
//   T Z = theta Z + A_1 Z^(1) + ... + A_k Z^(k),
// with the nilpotent part of the constant term zero throughout this library.
// r is the rank over C_inf[T] of the module so presented; for the stock
// constructors it is known in advance and recorded rather than recomputed.
struct MotiveSpec {
    TowerPtr tw;
    int n = 1;
    int r = 1;
    std::vector<Mat> A; // A[i-1] holds the tau^i coefficient; A.back() != 0
    std::string kind;

    int k() const { return static_cast<int>(A.size()); }
};

namespace motivedetail {

inline MotiveSpec finish(TowerPtr tw, int n, int r, std::vector<Mat> A, std::string kind) {
    if (A.empty() || mat_is_exact_zero(A.back()))
        throw ShapeError("motive: leading tau-coefficient must be nonzero");
    MotiveSpec m;
    m.tw = std::move(tw);
    m.n = n;
    m.r = r;
    m.A = std::move(A);
    m.kind = std::move(kind);
    return m;
}

} // namespace motivedetail

// T e = theta e + tau e (rank 1, dimension 1).
inline MotiveSpec make_carlitz(const TowerPtr& tw) {
    Mat a1{{Puiseux::one(tw)}};
    return motivedetail::finish(tw, 1, 1, {a1}, "carlitz");
}

// T e = theta e + tau^2 e (rank 2, dimension 1).
inline MotiveSpec make_carlitz2(const TowerPtr& tw) {
    Mat a1{{Puiseux::zero(tw, 0)}};
    Mat a2{{Puiseux::one(tw)}};
    return motivedetail::finish(tw, 1, 2, {a1, a2}, "carlitz2");
}

// Pure rank-3, dimension-2 family: tau-coefficient [[0,-a1],[1,-a2]] and
// tau^2-coefficient [[0,1],[0,0]].
inline MotiveSpec make_pure(const Puiseux& a1, const Puiseux& a2) {
    const TowerPtr& tw = a1.tw;
    Mat m1 = mat_zero(tw, 2, 2);
    m1[0][1] = -a1;
    m1[1][0] = Puiseux::one(tw);
    m1[1][1] = -a2;
    Mat m2 = mat_zero(tw, 2, 2);
    m2[0][1] = Puiseux::one(tw);
    return motivedetail::finish(tw, 2, 3, {m1, m2}, "pure");
}

// Non-pure rank-3, dimension-2 family: tau-coefficient A with lower-right
// entry exactly 1, tau^2-coefficient [[1,0],[0,0]].
inline MotiveSpec make_nonpure(const Mat& A) {
    if (A.size() != 2 || A[0].size() != 2 || A[1].size() != 2)
        throw ShapeError("make_nonpure: tau-coefficient must be 2x2");
    const TowerPtr& tw = A[0][0].tw;
    if (!eq_exact(A[1][1], Puiseux::one(tw)))
        throw ShapeError("make_nonpure: lower-right entry of the tau-coefficient must be 1");
    Mat m2 = mat_zero(tw, 2, 2);
    m2[0][0] = Puiseux::one(tw);
    return motivedetail::finish(tw, 2, 3, {A, m2}, "nonpure");
}

// The two one-parameter slices of make_nonpure used everywhere downstream.
inline MotiveSpec make_Ma(const Puiseux& a) {
    const TowerPtr& tw = a.tw;
    Mat m1 = mat_zero(tw, 2, 2);
    m1[0][1] = a;
    m1[1][1] = Puiseux::one(tw);
    return make_nonpure(m1);
}

inline MotiveSpec make_Mt(const Puiseux& a) {
    const TowerPtr& tw = a.tw;
    Mat m1 = mat_zero(tw, 2, 2);
    m1[1][0] = a;
    m1[1][1] = Puiseux::one(tw);
    return make_nonpure(m1);
}

inline Vec t_action(const MotiveSpec& m, const Vec& Z) {
    if (static_cast<int>(Z.size()) != m.n) throw ShapeError("t_action: column size mismatch");
    Vec r = vec_scale(Puiseux::theta(m.tw), Z);
    for (int i = 1; i <= m.k(); ++i)
        r = vec_add(r, mat_apply(m.A[static_cast<std::size_t>(i - 1)], vec_frob(Z, static_cast<std::uint64_t>(i))));
    return r;
}

// exp(Z) = Z + C_1 Z^(1) + C_2 Z^(2) + ... truncated at order M, together
// with the per-order valuation floors that drive the tail certificate.
struct ExpSeries {
    MotiveSpec motive;
    std::vector<Mat> C; // C[0] = I_n
    int M = 0;
    std::int64_t rel = 0;        // relative precision used for the theta_{m0} divisions
    std::vector<Rational> vfloor; // vfloor[m] <= v_inf of every entry of C[m]
};

namespace motivedetail {

inline const Rational kInfValuation = Rational(std::numeric_limits<std::int32_t>::max());

inline Rational mat_val_floor(const Mat& a) {
    Rational v = kInfValuation;
    for (const auto& row : a)
        for (const auto& x : row) {
            Rational w = x.val_lower();
            if (w < v) v = w;
        }
    return v;
}

inline std::int64_t qpow(std::uint32_t q, int m) {
    std::int64_t r = 1;
    for (int i = 0; i < m; ++i) {
        if (r > (std::int64_t{1} << 62) / q) throw Error("exp series: order out of range");
        r *= q;
    }
    return r;
}

} // namespace motivedetail

inline ExpSeries exp_series(const MotiveSpec& m, int M, std::int64_t rel = 96) {
    if (M < 0) throw ShapeError("exp_series: negative order");
    ExpSeries E;
    E.motive = m;
    E.M = M;
    E.rel = rel;
    E.C.push_back(mat_id(m.tw, static_cast<std::size_t>(m.n)));
    E.vfloor.push_back(Rational(0));
    for (int mm = 1; mm <= M; ++mm) {
        Mat acc = mat_zero(m.tw, static_cast<std::size_t>(m.n), static_cast<std::size_t>(m.n));
        for (int i = 1; i <= m.k() && i <= mm; ++i)
            acc = mat_add(acc, mat_mul(m.A[static_cast<std::size_t>(i - 1)],
                                       mat_frob(E.C[static_cast<std::size_t>(mm - i)], static_cast<std::uint64_t>(i))));
        Puiseux it = inv_to(theta_diff(m.tw, mm, 0), rel);
        E.C.push_back(mat_scale(it, acc));
        E.vfloor.push_back(motivedetail::mat_val_floor(E.C.back()));
    }
    return E;
}

// Certified lower bound on the valuation of the discarded tail
// sum_{m>M} C_m Z^(m) for any Z with v_inf(Z) >= vz. The computed orders
// pin an offset beta with v_inf(C_m) >= m q^m / (k+1) + beta; the
// recurrence propagates that line past M once
// q^{M+1}/(k+1) >= -v_inf(A) - (q^k - 1) beta.
struct TailCert {
    bool ok = false;
    Rational bound;
    std::string why;
};

inline TailCert tail_certificate(const ExpSeries& E, Rational vz) {
    TailCert out;
    const MotiveSpec& m = E.motive;
    std::uint32_t q = m.tw->q();
    int k = m.k();
    if (E.M < k) {
        out.why = "order below the recurrence depth";
        return out;
    }
    Rational c(1, k + 1);
    Rational beta(0);
    for (int mm = 1; mm <= E.M; ++mm) {
        Rational slack = E.vfloor[static_cast<std::size_t>(mm)] -
                         c * Rational(mm * motivedetail::qpow(q, mm));
        if (slack < beta) beta = slack;
    }
    Rational alpha = motivedetail::kInfValuation;
    for (const auto& a : m.A) {
        Rational w = motivedetail::mat_val_floor(a);
        if (w < alpha) alpha = w;
    }
    Rational qn(motivedetail::qpow(q, E.M + 1));
    if (qn * (Rational(1) - c * Rational(k)) < -alpha - Rational(motivedetail::qpow(q, k) - 1) * beta) {
        out.why = "valuation line does not yet propagate past the computed orders";
        return out;
    }
    Rational head = c * Rational(E.M + 1) + vz;
    if (!(Rational(0) < head)) {
        out.why = "argument valuation too low for the computed orders";
        return out;
    }
    out.ok = true;
    out.bound = qn * head + beta;
    return out;
}

inline Vec exp_eval(const ExpSeries& E, const Vec& Z) {
    const MotiveSpec& m = E.motive;
    if (static_cast<int>(Z.size()) != m.n) throw ShapeError("exp_eval: column size mismatch");
    bool all_zero = true;
    Rational vz = motivedetail::kInfValuation;
    for (const auto& z : Z) {
        if (!z.is_exact_zero()) all_zero = false;
        Rational w = z.val_lower();
        if (w < vz) vz = w;
    }
    if (all_zero) return Z;
    TailCert cert = tail_certificate(E, vz);
    if (!cert.ok) throw TailNotConvergent("exp_eval: " + cert.why);
    Vec S = Z;
    for (int mm = 1; mm <= E.M; ++mm)
        S = vec_add(S, mat_apply(E.C[static_cast<std::size_t>(mm)], vec_frob(Z, static_cast<std::uint64_t>(mm))));
    for (auto& x : S) {
        // bound in x's own ramification units, rounded toward -inf for safety
        std::int64_t num = cert.bound.num * x.e;
        std::int64_t den = cert.bound.den;
        std::int64_t slots = num / den - ((num % den != 0 && (num < 0) != (den < 0)) ? 1 : 0);
        x = trunc_abs(x, slots, x.e);
    }
    return S;
}

// Smallest order whose tail certificate clears `target` for arguments with
// v_inf >= vz; grows the series instead of guessing a fixed cutoff.
inline ExpSeries exp_series_auto(const MotiveSpec& m, Rational vz, Rational target, std::int64_t rel = 96) {
    std::string last = "order cap reached";
    for (int M = m.k(); M <= 64; ++M) {
        ExpSeries E = exp_series(m, M, rel);
        TailCert cert = tail_certificate(E, vz);
        if (cert.ok && target <= cert.bound) return E;
        if (!cert.ok) last = cert.why;
    }
    throw TailNotConvergent("exp_series_auto: " + last);
}

// v_inf of exp(theta Z) - T(exp(Z)); the functional equation makes this
// vanish, so the return value is at least the certified precision.
inline Rational check_functional_equation(const ExpSeries& E, const Vec& Z) {
    Vec lhs = exp_eval(E, vec_scale(Puiseux::theta(E.motive.tw), Z));
    Vec rhs = t_action(E.motive, exp_eval(E, Z));
    Rational v = motivedetail::kInfValuation;
    for (std::size_t i = 0; i < lhs.size(); ++i) {
        Rational w = (lhs[i] - rhs[i]).val_lower();
        if (w < v) v = w;
    }
    return v;
}

} // namespace tmotive

#endif
