#ifndef TMOTIVE_LATTICE_HPP
#define TMOTIVE_LATTICE_HPP

#include <algorithm>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "tmotive/analytic.hpp"

namespace tmotive {

// Basis of a rank-r discrete submodule of C_inf^n, one column per generator.
struct LatticeBasis {
    TowerPtr tw;
    int n = 0, r = 0;
    std::vector<Vec> cols;
    std::string provenance;
};

// Row matrix S with (tail columns)^t = S (head columns)^t.
struct SiegelMatrix {
    Mat S;
};

inline RankCert basis_rank(const LatticeBasis& B) { return r_infinity_rank(B.cols); }

// Rank of a family of scalars viewed as one-component vectors.
inline RankCert r_infinity_rank_scalars(const Vec& xs) {
    std::vector<std::vector<Puiseux>> rows;
    rows.reserve(xs.size());
    for (const auto& x : xs) rows.push_back({x});
    return r_infinity_rank(std::move(rows));
}

inline SiegelMatrix siegel(const LatticeBasis& B, std::int64_t rel = 96) {
    int n = B.n, r = B.r;
    Mat H(static_cast<std::size_t>(n), Vec(static_cast<std::size_t>(n)));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            H[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                B.cols[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    Puiseux d = det_small(H);
    if (!d.is_nonzero()) throw SingularHead("siegel: head columns are dependent at precision");
    Mat Hinv = mat_inv_small(H, rel * d.e);
    Mat T(static_cast<std::size_t>(r - n), Vec(static_cast<std::size_t>(n)));
    for (int i = 0; i < r - n; ++i)
        for (int j = 0; j < n; ++j)
            T[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                B.cols[static_cast<std::size_t>(n + i)][static_cast<std::size_t>(j)];
    SiegelMatrix S;
    S.S = mat_mul(T, Hinv);
    return S;
}

// Certificate-bearing duality decision for a single-row S = (s_1 .. s_k):
// the transposed matrix generates a rank-(k+1) sublattice of C_inf^k iff
// 1, s_1, ..., s_k are independent over F_q((1/theta)).
struct DualCert {
    bool exists = false;
    int rank = 0;
    bool exact = false;
    Rational certified_below;
};

inline DualCert dual_exists(const SiegelMatrix& S) {
    if (S.S.size() != 1) throw ShapeError("dual_exists: needs a single-row matrix");
    const TowerPtr& tw = S.S[0][0].tw;
    std::vector<std::vector<Puiseux>> rows{{Puiseux::one(tw)}};
    for (const auto& s : S.S[0]) rows.push_back({s});
    RankCert c = r_infinity_rank(std::move(rows));
    return {c.rank == static_cast<int>(1 + S.S[0].size()), c.rank, c.exact, c.certified_below};
}

enum class Triangular { upper, lower };

// Kernel basis of a rank-3, two-dimensional block-triangular module. The
// exact-zero off-diagonal of the exponential splits the kernel equations:
// one coordinate is a pure one-dimensional kernel condition solved by the
// cached generators, the other becomes a logarithm of the cross terms.
// E must carry enough orders for arguments at the first generator's
// valuation; build it with exp_series_auto at -q/(q-1).
inline LatticeBasis triangular_kernel_solve(const ExpSeries& E, Triangular orient,
                                            Rational target = Rational(48), std::int64_t rel = 96) {
    const MotiveSpec& m = E.motive;
    if (m.n != 2 || m.r != 3 || m.A.size() != 2)
        throw ShapeError("triangular_kernel_solve: needs the rank-3 two-dimensional shape");
    std::size_t zi = orient == Triangular::lower ? 0u : 1u;
    if (!m.A[0][zi][1 - zi].is_exact_zero())
        throw ShapeError("triangular_kernel_solve: off-diagonal coefficient is not exactly zero");
    const TowerPtr& tw = m.tw;
    const PeriodData& P = periods(tw, target, rel);
    Puiseux omega = Puiseux::from_ff(ff_omega(tw));
    Puiseux zero = Puiseux::zero(tw, 0);

    LatticeBasis B;
    B.tw = tw;
    B.n = 2;
    B.r = 3;
    if (orient == Triangular::lower) {
        B.provenance = "lower-triangular kernel";
        B.cols.push_back(Vec{zero, P.pi1});
        for (const Puiseux& zk : {P.pi2, omega * P.pi2}) {
            Vec col = exp_eval(E, Vec{zk, zero});
            if (col[0].is_nonzero())
                throw ContractionFailure("triangular_kernel_solve: generator fails its one-dimensional kernel check");
            B.cols.push_back(Vec{zk, carlitz_log_eval(tw, -col[1], target, rel)});
        }
    } else {
        B.provenance = "upper-triangular kernel";
        Vec v = exp_eval(E, Vec{zero, P.pi1});
        if (v[1].is_nonzero())
            throw ContractionFailure("triangular_kernel_solve: generator fails its one-dimensional kernel check");
        B.cols.push_back(Vec{log_eval_1d(make_carlitz2(tw), -v[0], target, rel), P.pi1});
        B.cols.push_back(Vec{P.pi2, zero});
        B.cols.push_back(Vec{omega * P.pi2, zero});
    }
    for (const auto& col : B.cols)
        for (const auto& y : exp_eval(E, col))
            if (y.is_nonzero())
                throw ContractionFailure("triangular_kernel_solve: a solved column misses the kernel at valuation " +
                                         y.val().str());
    return B;
}

enum class IsoVerdict { equal_after_normalization, distinct_at_precision, inconclusive };

struct IsoResult {
    IsoVerdict verdict = IsoVerdict::inconclusive;
    Rational below; // valuation up to which the verdict is certified
};

namespace latticedetail {

// The F_q[theta]-part of x: certified digits at nonpositive integer slots,
// prime-field component of each coefficient.
inline Puiseux fqtheta_part(const Puiseux& x) {
    Puiseux r = Puiseux::zero(x.tw, 0);
    if (!x.is_nonzero()) return r;
    std::uint32_t q = x.tw->q();
    for (std::size_t i = 0; i < x.c.size(); ++i) {
        std::int64_t s = x.lo + static_cast<std::int64_t>(i);
        if (s > 0 || s % x.e != 0) continue;
        std::uint32_t d = x.c[i] % q;
        if (d) r = r + Puiseux::monomial(x.tw, 0, 1, s / x.e, d);
    }
    return r;
}

inline Puiseux drop_fqtheta(const Puiseux& x) { return x - fqtheta_part(x); }

} // namespace latticedetail

// Sufficient equality check on 1x2 rows. Implemented basis moves, applied in
// this fixed order: subtract the F_q[theta]-part of every entry, then try
// each head-column permutation and each pair of F_q^* column scalings.
// "equal" needs every difference to vanish with at least `target` certified
// valuation; a candidate that vanishes with less keeps the verdict open.
inline IsoResult lattices_isomorphic_1x2(const SiegelMatrix& S1, const SiegelMatrix& S2,
                                         Rational target = Rational(8)) {
    if (S1.S.size() != 1 || S1.S[0].size() != 2 || S2.S.size() != 1 || S2.S[0].size() != 2)
        throw ShapeError("lattices_isomorphic_1x2: needs 1x2 rows");
    const TowerPtr& tw = S1.S[0][0].tw;
    std::uint32_t q = tw->q();
    Puiseux a0 = latticedetail::drop_fqtheta(S1.S[0][0]);
    Puiseux a1 = latticedetail::drop_fqtheta(S1.S[0][1]);

    bool open = false;
    Rational open_below(std::numeric_limits<std::int32_t>::min());
    Rational witness = motivedetail::kInfValuation;
    for (int sw = 0; sw < 2; ++sw)
        for (std::uint32_t c0 = 1; c0 < q; ++c0)
            for (std::uint32_t c1 = 1; c1 < q; ++c1) {
                Puiseux b0 = latticedetail::drop_fqtheta(Puiseux::scalar(tw, 0, c0) * S2.S[0][sw ? 1 : 0]);
                Puiseux b1 = latticedetail::drop_fqtheta(Puiseux::scalar(tw, 0, c1) * S2.S[0][sw ? 0 : 1]);
                Puiseux d0 = a0 - b0, d1 = a1 - b1;
                if (!d0.is_nonzero() && !d1.is_nonzero()) {
                    Rational below = std::min(d0.val_lower(), d1.val_lower());
                    if (below >= target) return {IsoVerdict::equal_after_normalization, below};
                    open = true;
                    if (open_below < below) open_below = below;
                } else {
                    Rational w = motivedetail::kInfValuation;
                    if (d0.is_nonzero()) w = std::min(w, d0.val());
                    if (d1.is_nonzero()) w = std::min(w, d1.val());
                    if (w < witness) witness = w;
                }
            }
    if (open) return {IsoVerdict::inconclusive, open_below};
    return {IsoVerdict::distinct_at_precision, witness};
}

} // namespace tmotive

#endif
