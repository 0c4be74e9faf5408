#ifndef TMOTIVE_LINALG_HPP
#define TMOTIVE_LINALG_HPP

#include <vector>

#include "tmotive/puiseux.hpp"

namespace tmotive {

using Vec = std::vector<Puiseux>;
using Mat = std::vector<std::vector<Puiseux>>;

inline Mat mat_zero(const TowerPtr& tw, std::size_t rows, std::size_t cols) {
    return Mat(rows, Vec(cols, Puiseux::zero(tw, 0)));
}

inline Mat mat_id(const TowerPtr& tw, std::size_t n) {
    Mat m = mat_zero(tw, n, n);
    for (std::size_t i = 0; i < n; ++i) m[i][i] = Puiseux::one(tw);
    return m;
}

inline Mat mat_add(const Mat& a, const Mat& b) {
    Mat r = a;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j) r[i][j] = a[i][j] + b[i][j];
    return r;
}

inline Mat mat_sub(const Mat& a, const Mat& b) {
    Mat r = a;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j) r[i][j] = a[i][j] - b[i][j];
    return r;
}

inline Mat mat_mul(const Mat& a, const Mat& b) {
    if (a.empty() || b.empty() || a[0].size() != b.size()) throw ShapeError("mat_mul: size mismatch");
    Mat r(a.size(), Vec(b[0].size(), Puiseux::zero(a[0][0].tw, 0)));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t k = 0; k < b.size(); ++k) {
            if (a[i][k].is_exact_zero()) continue;
            for (std::size_t j = 0; j < b[0].size(); ++j)
                r[i][j] = r[i][j] + a[i][k] * b[k][j];
        }
    return r;
}

inline Mat mat_scale(const Puiseux& c, const Mat& a) {
    Mat r = a;
    for (auto& row : r)
        for (auto& x : row) x = c * x;
    return r;
}

inline Vec mat_apply(const Mat& a, const Vec& v) {
    if (a.empty() || a[0].size() != v.size()) throw ShapeError("mat_apply: size mismatch");
    Vec r(a.size(), Puiseux::zero(v.empty() ? a[0][0].tw : v[0].tw, 0));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j) r[i] = r[i] + a[i][j] * v[j];
    return r;
}

inline Mat mat_frob(const Mat& a, std::uint64_t j) {
    Mat r = a;
    for (auto& row : r)
        for (auto& x : row) x = frob_twist(x, j);
    return r;
}

inline Vec vec_frob(const Vec& v, std::uint64_t j) {
    Vec r = v;
    for (auto& x : r) x = frob_twist(x, j);
    return r;
}

inline Vec vec_add(const Vec& a, const Vec& b) {
    Vec r = a;
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline Vec vec_sub(const Vec& a, const Vec& b) {
    Vec r = a;
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline Vec vec_scale(const Puiseux& c, const Vec& v) {
    Vec r = v;
    for (auto& x : r) x = c * x;
    return r;
}

inline bool mat_is_exact_zero(const Mat& a) {
    for (const auto& row : a)
        for (const auto& x : row)
            if (!x.is_exact_zero()) return false;
    return true;
}

inline bool mat_is_zero_at_prec(const Mat& a) {
    for (const auto& row : a)
        for (const auto& x : row)
            if (x.is_nonzero()) return false;
    return true;
}

// Determinant for n in {1, 2} (all motives in scope have dimension <= 2).
inline Puiseux det_small(const Mat& a) {
    if (a.size() == 1) return a[0][0];
    if (a.size() == 2) return a[0][0] * a[1][1] - a[0][1] * a[1][0];
    throw ShapeError("det_small: only 1x1 and 2x2 supported");
}

// Inverse for n in {1, 2}; relative precision follows the entry divisions.
// rel > 0 forces each entry division to rel kept digits (needed when the
// determinant is an exact non-monomial series).
inline Mat mat_inv_small(const Mat& a, std::int64_t rel = 0) {
    Puiseux d = det_small(a);
    if (!d.is_nonzero()) throw DivisionByZeroAtPrecision("mat_inv_small: determinant has no certified nonzero digit");
    auto over = [&](const Puiseux& x) { return rel > 0 ? div_to(x, d, rel) : x / d; };
    if (a.size() == 1) return {{over(Puiseux::one(a[0][0].tw))}};
    Mat r = mat_zero(a[0][0].tw, 2, 2);
    r[0][0] = over(a[1][1]);
    r[0][1] = -over(a[0][1]);
    r[1][0] = -over(a[1][0]);
    r[1][1] = over(a[0][0]);
    return r;
}

} // namespace tmotive

#endif
