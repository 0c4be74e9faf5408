#ifndef TMOTIVE_ORE_HPP
#define TMOTIVE_ORE_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <utility>
#include <vector>

#include "tmotive/linalg.hpp"

namespace tmotive {

// X = sum_i c[i] tau^i with n x n coefficient matrices, subject to tau a = a^q tau.
struct TwistedPoly {
    TowerPtr tw;
    std::size_t n = 1;
    std::vector<Mat> c;

    static TwistedPoly zero(TowerPtr tower, std::size_t n_) {
        TwistedPoly x;
        x.tw = std::move(tower);
        x.n = n_;
        return x;
    }

    static TwistedPoly identity(TowerPtr tower, std::size_t n_) {
        TwistedPoly x = zero(std::move(tower), n_);
        x.c.push_back(mat_id(x.tw, x.n));
        return x;
    }

    Mat coeff(std::size_t i) const {
        if (i < c.size()) return c[i];
        return mat_zero(tw, n, n);
    }

    // Largest i such that c[i] carries a certified nonzero digit; -1 if none.
    int degree() const {
        for (std::size_t i = c.size(); i-- > 0;)
            for (const auto& row : c[i])
                for (const auto& x : row)
                    if (x.is_nonzero()) return static_cast<int>(i);
        return -1;
    }

    void trim() {
        while (!c.empty() && mat_is_exact_zero(c.back())) c.pop_back();
    }
};

inline TwistedPoly ore_add(const TwistedPoly& X, const TwistedPoly& Y) {
    if (X.n != Y.n) throw ShapeError("ore_add: size mismatch");
    TwistedPoly r = X;
    if (Y.c.size() > r.c.size()) r.c.resize(Y.c.size(), mat_zero(r.tw, r.n, r.n));
    for (std::size_t i = 0; i < Y.c.size(); ++i) r.c[i] = mat_add(r.c[i], Y.c[i]);
    r.trim();
    return r;
}

inline TwistedPoly ore_sub(const TwistedPoly& X, const TwistedPoly& Y) {
    if (X.n != Y.n) throw ShapeError("ore_sub: size mismatch");
    TwistedPoly r = X;
    if (Y.c.size() > r.c.size()) r.c.resize(Y.c.size(), mat_zero(r.tw, r.n, r.n));
    for (std::size_t i = 0; i < Y.c.size(); ++i) r.c[i] = mat_sub(r.c[i], Y.c[i]);
    r.trim();
    return r;
}

inline TwistedPoly ore_scale(const Puiseux& s, const TwistedPoly& X) {
    TwistedPoly r = X;
    for (auto& m : r.c) m = mat_scale(s, m);
    r.trim();
    return r;
}

// (sum X_i tau^i)(sum Y_j tau^j): the tau^i passing Y_j twists it i times.
inline TwistedPoly ore_mul(const TwistedPoly& X, const TwistedPoly& Y) {
    if (X.n != Y.n) throw ShapeError("ore_mul: size mismatch");
    TwistedPoly r = TwistedPoly::zero(X.tw, X.n);
    if (X.c.empty() || Y.c.empty()) return r;
    r.c.assign(X.c.size() + Y.c.size() - 1, mat_zero(X.tw, X.n, X.n));
    for (std::size_t i = 0; i < X.c.size(); ++i) {
        if (mat_is_exact_zero(X.c[i])) continue;
        for (std::size_t j = 0; j < Y.c.size(); ++j)
            r.c[i + j] = mat_add(r.c[i + j], mat_mul(X.c[i], mat_frob(Y.c[j], i)));
    }
    r.trim();
    return r;
}

// Invertibility of the constant term decides unit-ness of the constant stratum;
// for higher degree it is the necessary first-order test.
inline bool is_unit(const TwistedPoly& X) {
    if (X.n > 2) throw ShapeError("is_unit: only sizes 1 and 2 supported");
    Puiseux d = det_small(X.coeff(0));
    if (d.is_nonzero()) return true;
    if (d.is_exact_zero()) return false;
    throw InsufficientPrecision("is_unit: det(X_0) is zero at working precision but not exactly zero");
}

// Y with X*Y = Y*X = I modulo tau^{K+1}, by the constant-term recurrence.
// rel > 0 fixes the relative precision of the constant-term inversion when the
// determinant is an exact non-monomial series.
inline TwistedPoly ore_inverse(const TwistedPoly& X, int K, std::int64_t rel = 0) {
    if (!is_unit(X)) throw Error("ore_inverse: constant term is not invertible");
    Mat inv0 = mat_inv_small(X.coeff(0), rel);
    TwistedPoly Y = TwistedPoly::zero(X.tw, X.n);
    Y.c.push_back(inv0);
    for (int m = 1; m <= K; ++m) {
        Mat acc = mat_zero(X.tw, X.n, X.n);
        std::size_t imax = std::min<std::size_t>(static_cast<std::size_t>(m),
                                                 X.c.empty() ? 0 : X.c.size() - 1);
        for (std::size_t i = 1; i <= imax; ++i)
            acc = mat_add(acc, mat_mul(X.c[i], mat_frob(Y.c[static_cast<std::size_t>(m) - i], i)));
        Y.c.push_back(mat_sub(mat_zero(X.tw, X.n, X.n), mat_mul(inv0, acc)));
    }
    return Y;
}

struct SemilinearSolution {
    TwistedPoly X;
    bool const_term_invertible = false; // det(X_0) has a certified nonzero digit
    bool det_below_precision = false;   // det(X_0) vanishes at precision but is not exactly zero
    bool unit = false;                  // degree 0 and invertible constant term
};

struct SemilinearResult {
    int kmax = 0;
    int nparams = 0; // free F_q parameters introduced before constraints
    int dim = 0;     // F_q-dimension of the solution space found
    std::vector<SemilinearSolution> basis;
    bool unit_exists = false;
    TwistedPoly unit_witness;
    bool search_exhaustive = true; // full enumeration of the solution space was feasible
    bool precision_doubt = false;  // some candidate determinant vanished at precision only
};

namespace oredetail {

// Affine-free linear form sum_j c[j] * lambda_j with F_q-valued parameters lambda.
// Since every parameter is fixed by Frobenius, q-power twists act coefficientwise,
// which keeps the whole coefficient-matching system F_q-linear.
struct Expr {
    std::vector<Puiseux> c;
};

class SemiSolver {
public:
    SemiSolver(TowerPtr tw, Puiseux a, Puiseux ap, bool lower, int kmax, std::int64_t prec_slots)
        : tw_(std::move(tw)), a_(std::move(a)), ap_(std::move(ap)), lower_(lower), k_(kmax), P_(prec_slots) {
        top_ = tw_->top();
        qs_ = tw_->q_stage();
        q_ = tw_->q();
        kdig_ = tw_->stage(top_).deg_fp / tw_->stage(qs_).deg_fp;
        W_ = 2 * (k_ + 1) * kdig_;
    }

    SemilinearResult run(std::uint64_t enum_cap) {
        build_families();
        auto nullb = null_space();
        return package(nullb, enum_cap);
    }

private:
    TowerPtr tw_;
    Puiseux a_, ap_;
    bool lower_;
    int k_;
    std::int64_t P_;
    int top_ = 0, qs_ = 0;
    std::uint32_t q_ = 0;
    int kdig_ = 0, W_ = 0;
    int next_param_ = 0;
    bool constraints_truncated_ = false;  // some relation row window was cut by input precision
    std::vector<Expr> Pv_, Rv_, Sv_, Tv_;                 // entry families: (0,0),(0,1),(1,0),(1,1)
    std::vector<std::vector<std::uint32_t>> constraints_; // rows of top-stage values, width W_

    Expr ezero() const { return Expr{std::vector<Puiseux>(static_cast<std::size_t>(W_), Puiseux::zero(tw_, 0))}; }

    static Expr eadd(const Expr& x, const Expr& y) {
        Expr r = x;
        for (std::size_t j = 0; j < r.c.size(); ++j) r.c[j] = r.c[j] + y.c[j];
        return r;
    }
    static Expr esub(const Expr& x, const Expr& y) {
        Expr r = x;
        for (std::size_t j = 0; j < r.c.size(); ++j) r.c[j] = r.c[j] - y.c[j];
        return r;
    }
    static Expr escale(const Puiseux& s, const Expr& x) {
        Expr r = x;
        for (auto& v : r.c) v = s * v;
        return r;
    }
    static Expr efrob(const Expr& x, std::uint64_t j) {
        Expr r = x;
        for (auto& v : r.c) v = frob_twist(v, j);
        return r;
    }
    static Expr eroot(const Expr& x, std::uint64_t j) {
        Expr r = x;
        for (auto& v : r.c) v = root_twist(v, j);
        return r;
    }

    const Expr& get(const std::vector<Expr>& fam, int i, const Expr& z) const {
        return (i >= 0 && i <= k_) ? fam[static_cast<std::size_t>(i)] : z;
    }

    struct Window {
        std::int64_t E = 1, LO = 0, HI = 0;
    };

    Window window_of(const Expr& R) const {
        Window w;
        for (const auto& x : R.c)
            if (!x.is_exact_zero()) w.E = std::lcm(w.E, x.e);
        w.HI = P_ * w.E;
        for (const auto& x : R.c) {
            std::int64_t f = w.E / x.e;
            if (x.is_nonzero()) w.LO = std::min(w.LO, x.lo * f);
            if (!x.is_exact()) w.HI = std::min(w.HI, x.prec * f);
        }
        return w;
    }

    std::vector<std::uint32_t> slot_row(const Expr& R, const Window& w, std::int64_t s) const {
        std::vector<std::uint32_t> v(static_cast<std::size_t>(W_), 0);
        for (int j = 0; j < W_; ++j) {
            const Puiseux& x = R.c[static_cast<std::size_t>(j)];
            std::int64_t f = w.E / x.e;
            if (s % f == 0) v[static_cast<std::size_t>(j)] = x.coeff_at_slot(s / f);
        }
        return v;
    }

    static bool row_zero(const std::vector<std::uint32_t>& r) {
        for (auto v : r)
            if (v) return false;
        return true;
    }

    // Solves y^{q^w} - y = R slot by slot. Slots propagate along geometric
    // chains s -> q^w s; chain tails that would escape below R's support are
    // recorded as linear constraints, and the slot-0 component ranges over the
    // top field through fresh parameters tied by its own closing constraint.
    Expr as_solve(const Expr& R, int w) {
        std::int64_t Q = 1;
        for (int i = 0; i < w; ++i) Q *= static_cast<std::int64_t>(q_);
        Window win = window_of(R);
        if (win.HI <= 0)
            throw InsufficientPrecision("semilinear solve: working window has no positive depth left");
        // An exact column without positive slots feeds chains that die inside
        // the window, so its solution column is exact as well.
        std::vector<char> col_exact(static_cast<std::size_t>(W_), 0);
        for (int j = 0; j < W_; ++j) {
            const Puiseux& x = R.c[static_cast<std::size_t>(j)];
            if (!x.is_exact()) continue;
            std::int64_t f = win.E / x.e;
            std::int64_t smax = x.is_nonzero() ? (x.lo + static_cast<std::int64_t>(x.c.size()) - 1) * f : 0;
            if (smax <= 0) col_exact[static_cast<std::size_t>(j)] = 1;
        }
        std::map<std::int64_t, std::vector<std::uint32_t>> y;
        auto powQ = [&](std::vector<std::uint32_t> r) {
            for (auto& v : r) v = tw_->frob(top_, v, static_cast<std::uint64_t>(w));
            return r;
        };
        auto minus = [&](std::vector<std::uint32_t> lhs, const std::vector<std::uint32_t>& rhs) {
            for (std::size_t j = 0; j < lhs.size(); ++j) lhs[j] = tw_->sub(top_, lhs[j], rhs[j]);
            return lhs;
        };
        for (std::int64_t s = -1; s >= win.LO; --s) {
            std::vector<std::uint32_t> v(static_cast<std::size_t>(W_), 0);
            if (s % Q == 0) {
                auto it = y.find(s / Q);
                if (it != y.end()) v = powQ(it->second);
            }
            v = minus(std::move(v), slot_row(R, win, s));
            if (!row_zero(v)) y[s] = std::move(v);
        }
        for (const auto& [s, v] : y)
            if (s < 0 && Q * s < win.LO) constraints_.push_back(v);
        { // slot 0: y_0 ranges over the top field, subject to y_0^{q^w} - y_0 = R_0
            auto r0 = slot_row(R, win, 0);
            std::vector<std::uint32_t> con(static_cast<std::size_t>(W_), 0);
            for (int j = 0; j < W_; ++j)
                con[static_cast<std::size_t>(j)] = tw_->neg(top_, r0[static_cast<std::size_t>(j)]);
            std::vector<std::uint32_t> y0(static_cast<std::size_t>(W_), 0);
            for (int d = 0; d < kdig_; ++d) {
                int pj = next_param_++;
                std::uint32_t b = 1;
                for (int i = 0; i < d; ++i) b *= q_; // basis element with F_q-digit vector e_d
                y0[static_cast<std::size_t>(pj)] = b;
                con[static_cast<std::size_t>(pj)] =
                    tw_->add(top_, con[static_cast<std::size_t>(pj)],
                             tw_->sub(top_, tw_->frob(top_, b, static_cast<std::uint64_t>(w)), b));
            }
            y[0] = std::move(y0);
            constraints_.push_back(std::move(con));
        }
        for (std::int64_t s = 1; s < win.HI; ++s) {
            std::vector<std::uint32_t> v(static_cast<std::size_t>(W_), 0);
            if (s % Q == 0) {
                auto it = y.find(s / Q);
                if (it != y.end()) v = powQ(it->second);
            }
            v = minus(std::move(v), slot_row(R, win, s));
            if (!row_zero(v)) y[s] = std::move(v);
        }
        // Reassemble one series per parameter; columns untouched by R and not
        // freshly parameterized stay exactly zero.
        Expr out = ezero();
        for (int j = 0; j < W_; ++j) {
            std::int64_t lo = 0, hi = 0;
            bool has = false;
            for (const auto& [s, v] : y)
                if (v[static_cast<std::size_t>(j)]) {
                    if (!has) lo = s;
                    hi = s;
                    has = true;
                }
            bool tracked = has || !R.c[static_cast<std::size_t>(j)].is_exact_zero() ||
                           (j >= next_param_ - kdig_ && j < next_param_);
            if (!tracked) continue;
            Puiseux x;
            x.tw = tw_;
            x.stage = top_;
            x.e = win.E;
            x.prec = col_exact[static_cast<std::size_t>(j)] ? Puiseux::EXACT : win.HI;
            if (has) {
                x.lo = lo;
                x.c.assign(static_cast<std::size_t>(hi - lo + 1), 0);
                for (const auto& [s, v] : y)
                    if (v[static_cast<std::size_t>(j)])
                        x.c[static_cast<std::size_t>(s - lo)] = v[static_cast<std::size_t>(j)];
            }
            x.normalize();
            out.c[static_cast<std::size_t>(j)] = x;
        }
        return out;
    }

    void push_expr_constraint(const Expr& C) {
        bool any = false;
        for (const auto& x : C.c)
            if (!x.is_exact_zero()) any = true;
        if (!any) return;
        Window win = window_of(C);
        if (win.HI <= 0)
            throw InsufficientPrecision("semilinear solve: a closing relation sits entirely below precision");
        if (win.HI < P_ * win.E) constraints_truncated_ = true;
        for (std::int64_t s = win.LO; s < win.HI; ++s) {
            auto v = slot_row(C, win, s);
            if (!row_zero(v)) constraints_.push_back(std::move(v));
        }
    }

    void build_families() {
        Expr Z = ezero();
        Pv_.assign(static_cast<std::size_t>(k_ + 1), Z);
        Rv_.assign(static_cast<std::size_t>(k_ + 1), Z);
        Sv_.assign(static_cast<std::size_t>(k_ + 1), Z);
        Tv_.assign(static_cast<std::size_t>(k_ + 1), Z);
        auto th = [&](int m) { return theta_diff(tw_, m, 0); };
        auto apw = [&](int j) { return frob_twist(ap_, static_cast<std::uint64_t>(j)); };
        const int k = k_;
        if (!lower_) {
            // A = [[0,a],[0,1]]: entry equations of theta-degree matching, top down.
            for (int m = k + 2; m >= 2; --m)
                Sv_[static_cast<std::size_t>(m - 2)] =
                    esub(efrob(get(Sv_, m - 1, Z), 1), escale(th(m), get(Sv_, m, Z)));
            push_expr_constraint(esub(efrob(get(Sv_, 0, Z), 1), escale(th(1), get(Sv_, 1, Z))));
            for (int m = k + 1; m >= 1; --m)
                Tv_[static_cast<std::size_t>(m - 1)] = as_solve(
                    eadd(escale(th(m), get(Tv_, m, Z)), escale(apw(m - 1), get(Sv_, m - 1, Z))), 1);
            for (int m = k + 2; m >= 2; --m)
                Pv_[static_cast<std::size_t>(m - 2)] = as_solve(
                    esub(escale(th(m), get(Pv_, m, Z)), escale(a_, efrob(get(Sv_, m - 1, Z), 1))), 2);
            push_expr_constraint(
                esub(escale(a_, efrob(get(Sv_, 0, Z), 1)), escale(th(1), get(Pv_, 1, Z))));
            for (int m = k + 2; m >= 2; --m)
                Rv_[static_cast<std::size_t>(m - 2)] = eroot(
                    eadd(eadd(escale(th(m), get(Rv_, m, Z)), escale(apw(m - 1), get(Pv_, m - 1, Z))),
                         esub(get(Rv_, m - 1, Z), escale(a_, efrob(get(Tv_, m - 1, Z), 1)))),
                    2);
            push_expr_constraint(esub(esub(escale(a_, efrob(get(Tv_, 0, Z), 1)),
                                           escale(apw(0), get(Pv_, 0, Z))),
                                      eadd(get(Rv_, 0, Z), escale(th(1), get(Rv_, 1, Z)))));
        } else {
            // A = [[0,0],[a,1]]: mirrored roles, (0,1) entries cascade to zero.
            for (int m = k + 2; m >= 2; --m)
                Rv_[static_cast<std::size_t>(m - 2)] =
                    eroot(eadd(escale(th(m), get(Rv_, m, Z)), get(Rv_, m - 1, Z)), 2);
            push_expr_constraint(eadd(escale(th(1), get(Rv_, 1, Z)), get(Rv_, 0, Z)));
            for (int m = k + 1; m >= 1; --m)
                Tv_[static_cast<std::size_t>(m - 1)] = as_solve(
                    esub(escale(th(m), get(Tv_, m, Z)), escale(a_, efrob(get(Rv_, m - 1, Z), 1))), 1);
            for (int m = k + 2; m >= 2; --m)
                Pv_[static_cast<std::size_t>(m - 2)] = as_solve(
                    eadd(escale(th(m), get(Pv_, m, Z)), escale(apw(m - 1), get(Rv_, m - 1, Z))), 2);
            push_expr_constraint(eadd(escale(th(1), get(Pv_, 1, Z)), escale(apw(0), get(Rv_, 0, Z))));
            for (int m = k + 2; m >= 2; --m)
                Sv_[static_cast<std::size_t>(m - 2)] =
                    esub(eadd(escale(a_, efrob(get(Pv_, m - 1, Z), 1)), efrob(get(Sv_, m - 1, Z), 1)),
                         eadd(escale(apw(m - 1), get(Tv_, m - 1, Z)), escale(th(m), get(Sv_, m, Z))));
            push_expr_constraint(esub(eadd(escale(a_, efrob(get(Pv_, 0, Z), 1)), efrob(get(Sv_, 0, Z), 1)),
                                      eadd(escale(apw(0), get(Tv_, 0, Z)), escale(th(1), get(Sv_, 1, Z)))));
        }
    }

    // Expand top-field rows into F_q rows and compute the parameter null space.
    std::vector<std::vector<std::uint32_t>> null_space() const {
        std::vector<std::vector<std::uint32_t>> rows;
        for (const auto& r : constraints_) {
            std::vector<std::vector<std::uint32_t>> dig(static_cast<std::size_t>(kdig_),
                                                        std::vector<std::uint32_t>(static_cast<std::size_t>(W_), 0));
            for (int j = 0; j < W_; ++j) {
                auto d = tw_->coords_fq(top_, r[static_cast<std::size_t>(j)]);
                for (int t = 0; t < kdig_ && t < static_cast<int>(d.size()); ++t)
                    dig[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)] = d[static_cast<std::size_t>(t)];
            }
            for (auto& rr : dig)
                if (!row_zero(rr)) rows.push_back(std::move(rr));
        }
        // reduced row echelon form over F_q
        int rank = 0;
        std::vector<int> piv;
        for (int col = 0; col < W_ && rank < static_cast<int>(rows.size()); ++col) {
            int sel = -1;
            for (int r = rank; r < static_cast<int>(rows.size()); ++r)
                if (rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)]) {
                    sel = r;
                    break;
                }
            if (sel < 0) continue;
            std::swap(rows[static_cast<std::size_t>(rank)], rows[static_cast<std::size_t>(sel)]);
            std::uint32_t pv = rows[static_cast<std::size_t>(rank)][static_cast<std::size_t>(col)];
            std::uint32_t pinv = tw_->inv(qs_, pv);
            for (auto& v : rows[static_cast<std::size_t>(rank)]) v = tw_->mul(qs_, v, pinv);
            for (int r = 0; r < static_cast<int>(rows.size()); ++r) {
                if (r == rank) continue;
                std::uint32_t f = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)];
                if (!f) continue;
                for (int j = 0; j < W_; ++j)
                    rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)] =
                        tw_->sub(qs_, rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)],
                                 tw_->mul(qs_, f, rows[static_cast<std::size_t>(rank)][static_cast<std::size_t>(j)]));
            }
            piv.push_back(col);
            ++rank;
        }
        std::vector<char> is_piv(static_cast<std::size_t>(W_), 0);
        for (int c : piv) is_piv[static_cast<std::size_t>(c)] = 1;
        std::vector<std::vector<std::uint32_t>> basis;
        for (int f = 0; f < W_; ++f) {
            if (is_piv[static_cast<std::size_t>(f)]) continue;
            std::vector<std::uint32_t> v(static_cast<std::size_t>(W_), 0);
            v[static_cast<std::size_t>(f)] = 1;
            for (int i = 0; i < rank; ++i)
                v[static_cast<std::size_t>(piv[static_cast<std::size_t>(i)])] =
                    tw_->neg(qs_, rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(f)]);
            basis.push_back(std::move(v));
        }
        return basis;
    }

    Puiseux eval_expr(const Expr& Ex, const std::vector<std::uint32_t>& lam) const {
        Puiseux acc = Puiseux::zero(tw_, 0);
        for (int j = 0; j < W_; ++j) {
            std::uint32_t l = lam[static_cast<std::size_t>(j)];
            if (!l) continue;
            Puiseux term = Ex.c[static_cast<std::size_t>(j)];
            if (l != 1) term = Puiseux::scalar(tw_, qs_, l) * term;
            acc = acc + term;
        }
        return acc;
    }

    Mat eval_const_term(const std::vector<std::uint32_t>& lam) const {
        Mat m = mat_zero(tw_, 2, 2);
        m[0][0] = eval_expr(Pv_[0], lam);
        m[0][1] = eval_expr(Rv_[0], lam);
        m[1][0] = eval_expr(Sv_[0], lam);
        m[1][1] = eval_expr(Tv_[0], lam);
        return m;
    }

    TwistedPoly build_X(const std::vector<std::uint32_t>& lam) const {
        TwistedPoly X = TwistedPoly::zero(tw_, 2);
        X.c.assign(static_cast<std::size_t>(k_ + 1), mat_zero(tw_, 2, 2));
        for (int i = 0; i <= k_; ++i) {
            auto si = static_cast<std::size_t>(i);
            X.c[si][0][0] = eval_expr(Pv_[si], lam);
            X.c[si][0][1] = eval_expr(Rv_[si], lam);
            X.c[si][1][0] = eval_expr(Sv_[si], lam);
            X.c[si][1][1] = eval_expr(Tv_[si], lam);
        }
        X.trim();
        return X;
    }

    SemilinearResult package(const std::vector<std::vector<std::uint32_t>>& nullb,
                             std::uint64_t enum_cap) const {
        SemilinearResult res;
        res.kmax = k_;
        res.nparams = W_;
        res.dim = static_cast<int>(nullb.size());
        res.precision_doubt = constraints_truncated_;
        for (const auto& lam : nullb) {
            SemilinearSolution sol;
            sol.X = build_X(lam);
            Puiseux d = det_small(sol.X.coeff(0));
            sol.const_term_invertible = d.is_nonzero();
            sol.det_below_precision = d.is_zero_at_prec();
            sol.unit = sol.const_term_invertible && sol.X.degree() == 0;
            res.basis.push_back(std::move(sol));
        }
        // Search the F_q-span for a genuine (degree-0, invertible) unit.
        std::uint64_t total = 1;
        bool overflow = false;
        for (int i = 0; i < res.dim; ++i) {
            total *= q_;
            if (total > enum_cap) {
                overflow = true;
                break;
            }
        }
        SemilinearResult out = res;
        if (overflow) {
            out.search_exhaustive = false;
            for (const auto& sol : out.basis)
                if (sol.unit && !out.unit_exists) {
                    out.unit_exists = true;
                    out.unit_witness = sol.X;
                }
            for (const auto& sol : out.basis)
                if (sol.det_below_precision) out.precision_doubt = true;
            return out;
        }
        std::vector<std::uint32_t> mu(static_cast<std::size_t>(res.dim), 0);
        while (true) {
            // advance the base-q odometer; stop after wrapping to all zeros
            int pos = 0;
            while (pos < res.dim) {
                auto sp = static_cast<std::size_t>(pos);
                mu[sp]++;
                if (mu[sp] < q_) break;
                mu[sp] = 0;
                ++pos;
            }
            if (pos == res.dim) break;
            std::vector<std::uint32_t> lam(static_cast<std::size_t>(W_), 0);
            for (int i = 0; i < res.dim; ++i) {
                std::uint32_t m = mu[static_cast<std::size_t>(i)];
                if (!m) continue;
                for (int j = 0; j < W_; ++j)
                    lam[static_cast<std::size_t>(j)] =
                        tw_->add(qs_, lam[static_cast<std::size_t>(j)],
                                 tw_->mul(qs_, m, nullb[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]));
            }
            Puiseux d = det_small(eval_const_term(lam));
            if (d.is_nonzero()) {
                TwistedPoly X = build_X(lam);
                if (X.degree() == 0 && !out.unit_exists) {
                    out.unit_exists = true;
                    out.unit_witness = X;
                }
            } else if (d.is_zero_at_prec()) {
                out.precision_doubt = true;
            }
            if (out.unit_exists) break;
        }
        return out;
    }
};

} // namespace oredetail

// Coefficient matching for X * (T-action of A) = (T-action of A') * X on
// rank-2 modules whose tau-coefficient is [[0,a],[0,1]] or [[0,0],[a,1]],
// with X of degree <= kmax. Returns an F_q-basis of the solution space plus
// a unit witness when the span contains one.
inline SemilinearResult solve_semilinear_bounded(const Mat& A, const Mat& Ap, int kmax,
                                                 std::int64_t prec_slots = 64,
                                                 std::uint64_t enum_cap = 4096) {
    if (A.size() != 2 || A[0].size() != 2 || Ap.size() != 2 || Ap[0].size() != 2)
        throw ShapeError("solve_semilinear_bounded: expected 2x2 coefficient matrices");
    if (kmax < 0) throw ShapeError("solve_semilinear_bounded: kmax must be >= 0");
    TowerPtr tw = A[0][0].tw;
    auto is_one = [&](const Puiseux& x) { return (x - Puiseux::one(tw)).is_exact_zero(); };
    auto upper_shaped = [&](const Mat& M) {
        return M[0][0].is_exact_zero() && M[1][0].is_exact_zero() && is_one(M[1][1]);
    };
    auto lower_shaped = [&](const Mat& M) {
        return M[0][0].is_exact_zero() && M[0][1].is_exact_zero() && is_one(M[1][1]);
    };
    bool upper = upper_shaped(A) && upper_shaped(Ap);
    bool lower = lower_shaped(A) && lower_shaped(Ap);
    if (!upper && !lower)
        throw SolverIncomplete(
            "solve_semilinear_bounded: only tau-coefficients [[0,a],[0,1]] and [[0,0],[a,1]] are in scope");
    Puiseux a = upper ? A[0][1] : A[1][0];
    Puiseux ap = upper ? Ap[0][1] : Ap[1][0];
    oredetail::SemiSolver solver(tw, a, ap, !upper, kmax, prec_slots);
    return solver.run(enum_cap);
}

} // namespace tmotive

#endif
