#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <vector>

#include "tmotive/motive.hpp"

using namespace tmotive;

namespace {

Puiseux random_exact(std::mt19937_64& rng, const TowerPtr& tw, int stage,
                     std::int64_t e, std::int64_t lo_min, int span) {
    std::uniform_int_distribution<std::uint32_t> coeff(0, tw->size(stage) - 1);
    Puiseux r = Puiseux::zero(tw, stage);
    for (int i = 0; i < span; ++i) {
        std::uint32_t cv = coeff(rng);
        if (cv) r = r + Puiseux::monomial(tw, stage, e, lo_min + i, cv);
    }
    return r;
}

// 1 / (theta_{j,i_1} ... theta_{j,i_s}) written independently of the
// recurrence, as the plain product-then-invert it abbreviates.
Puiseux inv_theta_prod(const TowerPtr& tw, int j, const std::vector<int>& lows, std::int64_t rel) {
    Puiseux p = Puiseux::one(tw);
    for (int i : lows) p = p * theta_diff(tw, j, i);
    return inv_to(p, rel);
}

Puiseux carlitz_c(const TowerPtr& tw, int j, std::int64_t rel) {
    std::vector<int> lows;
    for (int i = j - 1; i >= 0; --i) lows.push_back(i);
    return inv_theta_prod(tw, j, lows, rel);
}

Puiseux carlitz2_c(const TowerPtr& tw, int j, std::int64_t rel) {
    std::vector<int> lows;
    for (int i = j - 2; i >= 0; i -= 2) lows.push_back(i);
    return inv_theta_prod(tw, j, lows, rel);
}

bool vec_eq_at_prec(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!eq_at_prec(a[i], b[i])) return false;
    return true;
}

Vec random_col(std::mt19937_64& rng, const TowerPtr& tw, int n, std::int64_t lo_min) {
    Vec z;
    for (int i = 0; i < n; ++i) z.push_back(random_exact(rng, tw, tw->top(), 1, lo_min, 3));
    return z;
}

} // namespace

TEST_CASE("constructor shapes and ranks") {
    auto tw = Tower::make(3, 2);
    Puiseux th = Puiseux::theta(tw);
    Puiseux one = Puiseux::one(tw);
    Puiseux zero = Puiseux::zero(tw, 0);

    MotiveSpec c1 = make_carlitz(tw);
    REQUIRE(c1.n == 1);
    REQUIRE(c1.r == 1);
    REQUIRE(c1.k() == 1);
    REQUIRE(eq_exact(c1.A[0][0][0], one));

    MotiveSpec c2 = make_carlitz2(tw);
    REQUIRE(c2.n == 1);
    REQUIRE(c2.r == 2);
    REQUIRE(c2.k() == 2);
    REQUIRE(c2.A[0][0][0].is_exact_zero());
    REQUIRE(eq_exact(c2.A[1][0][0], one));

    Puiseux a1 = th + one, a2 = th * th;
    MotiveSpec p = make_pure(a1, a2);
    REQUIRE(p.n == 2);
    REQUIRE(p.r == 3);
    REQUIRE(p.A[0][0][0].is_exact_zero());
    REQUIRE(eq_exact(p.A[0][0][1], -a1));
    REQUIRE(eq_exact(p.A[0][1][0], one));
    REQUIRE(eq_exact(p.A[0][1][1], -a2));
    REQUIRE(eq_exact(p.A[1][0][1], one));
    REQUIRE(p.A[1][0][0].is_exact_zero());
    REQUIRE(p.A[1][1][0].is_exact_zero());
    REQUIRE(p.A[1][1][1].is_exact_zero());

    MotiveSpec ma = make_Ma(th);
    REQUIRE(ma.n == 2);
    REQUIRE(ma.r == 3);
    REQUIRE(eq_exact(ma.A[0][0][1], th));
    REQUIRE(eq_exact(ma.A[0][1][1], one));
    REQUIRE(ma.A[0][0][0].is_exact_zero());
    REQUIRE(ma.A[0][1][0].is_exact_zero());
    REQUIRE(eq_exact(ma.A[1][0][0], one));

    MotiveSpec mt = make_Mt(th);
    REQUIRE(eq_exact(mt.A[0][1][0], th));
    REQUIRE(eq_exact(mt.A[0][1][1], one));
    REQUIRE(mt.A[0][0][1].is_exact_zero());
    REQUIRE(eq_exact(mt.A[1][0][0], one));

    Mat bad = mat_zero(tw, 2, 2);
    bad[1][1] = th; // lower-right must be exactly 1
    REQUIRE_THROWS_AS(make_nonpure(bad), ShapeError);
    REQUIRE_THROWS_AS(make_nonpure(Mat{{one, one}}), ShapeError);

    // a = 0 splits into a rank-2 block on e_1 and a rank-1 block on e_2
    MotiveSpec m0 = make_Ma(zero);
    REQUIRE(eq_exact(m0.A[1][0][0], c2.A[1][0][0]));
    REQUIRE(eq_exact(m0.A[0][1][1], c1.A[0][0][0]));
    REQUIRE(m0.A[0][0][1].is_exact_zero());
    REQUIRE(m0.A[1][0][1].is_exact_zero());
    REQUIRE(m0.A[1][1][0].is_exact_zero());
}

TEST_CASE("module action on columns") {
    auto tw = Tower::make(3, 2);
    std::mt19937_64 rng(0x5eed3001ULL);
    Puiseux th = Puiseux::theta(tw);

    MotiveSpec c1 = make_carlitz(tw);
    Vec zcol{Puiseux::zero(tw, 0)};
    REQUIRE(t_action(c1, zcol)[0].is_exact_zero());

    for (int rep = 0; rep < 8; ++rep) {
        Puiseux z = random_exact(rng, tw, tw->top(), 1, -2, 4);
        Vec out = t_action(c1, Vec{z});
        REQUIRE(eq_exact(out[0], th * z + frob_twist(z, 1)));
    }

    Puiseux a = random_exact(rng, tw, tw->top(), 1, 0, 3);
    MotiveSpec ma = make_Ma(a);
    for (int rep = 0; rep < 8; ++rep) {
        Puiseux z = random_exact(rng, tw, tw->top(), 1, -1, 4);
        Vec out = t_action(ma, Vec{Puiseux::zero(tw, 0), z});
        REQUIRE(eq_exact(out[0], a * frob_twist(z, 1)));
        REQUIRE(eq_exact(out[1], th * z + frob_twist(z, 1)));
    }

    // F_q-linearity of the action
    MotiveSpec mt = make_Mt(a);
    std::uniform_int_distribution<std::uint32_t> lam_pick(0, tw->q() - 1);
    for (int rep = 0; rep < 8; ++rep) {
        Vec z1 = random_col(rng, tw, 2, -2);
        Vec z2 = random_col(rng, tw, 2, -2);
        Puiseux lam = Puiseux::scalar(tw, tw->q_stage(), lam_pick(rng));
        Vec lhs = t_action(mt, vec_add(z1, vec_scale(lam, z2)));
        Vec rhs = vec_add(t_action(mt, z1), vec_scale(lam, t_action(mt, z2)));
        REQUIRE(vec_eq_at_prec(lhs, rhs));
    }
}

TEST_CASE("exponential coefficients match the closed products") {
    for (std::uint32_t q : {2u, 3u}) {
        auto tw = Tower::make(q, q % 2 ? 2 : 1);
        const std::int64_t rel = 96;

        ExpSeries e1 = exp_series(make_carlitz(tw), 8, rel);
        REQUIRE(eq_exact(e1.C[0][0][0], Puiseux::one(tw)));
        for (int m = 1; m <= 8; ++m) {
            REQUIRE(eq_at_prec(e1.C[m][0][0], carlitz_c(tw, m, rel)));
            // each of the m inverted factors contributes q^m to the valuation
            REQUIRE(e1.C[m][0][0].val() == Rational(m) * Rational(motivedetail::qpow(q, m)));
        }

        ExpSeries e2 = exp_series(make_carlitz2(tw), 8, rel);
        for (int m = 1; m <= 8; ++m) {
            if (m % 2 == 0) {
                REQUIRE(eq_at_prec(e2.C[m][0][0], carlitz2_c(tw, m, rel)));
            } else {
                REQUIRE(e2.C[m][0][0].is_exact_zero());
            }
        }
    }
}

TEST_CASE("triangular coefficient shapes of the two-parameter slices") {
    auto tw = Tower::make(2);
    std::mt19937_64 rng(0x5eed3002ULL);
    const std::int64_t rel = 96;

    for (int rep = 0; rep < 3; ++rep) {
        Puiseux a = random_exact(rng, tw, tw->top(), 1, 0, 3);
        ExpSeries ea = exp_series(make_Ma(a), 8, rel);
        ExpSeries et = exp_series(make_Mt(a), 8, rel);
        for (int m = 1; m <= 8; ++m) {
            const Mat& Cm = ea.C[static_cast<std::size_t>(m)];
            const Mat& Tm = et.C[static_cast<std::size_t>(m)];
            REQUIRE(Cm[1][0].is_exact_zero());
            REQUIRE(Tm[0][1].is_exact_zero());
            REQUIRE(eq_at_prec(Cm[1][1], carlitz_c(tw, m, rel)));
            if (m % 2 == 0) {
                REQUIRE(eq_at_prec(Cm[0][0], carlitz2_c(tw, m, rel)));
            } else {
                REQUIRE(Cm[0][0].is_exact_zero());
            }
            // the slices mirror each other in shape and diagonal, but the
            // off-diagonal recurrences differ (q^2- vs q-power steps)
            REQUIRE(eq_at_prec(Tm[0][0], Cm[0][0]));
            REQUIRE(eq_at_prec(Tm[1][1], Cm[1][1]));
        }
        auto star = [&](int m) { return ea.C[static_cast<std::size_t>(m)][0][1]; };
        REQUIRE(eq_at_prec(star(1), a * inv_theta_prod(tw, 1, {0}, rel)));
        REQUIRE(eq_at_prec(star(2), a * inv_theta_prod(tw, 2, {1, 0}, rel)));
        REQUIRE(eq_at_prec(star(3), a * inv_theta_prod(tw, 3, {2, 1, 0}, rel) +
                                        frob_twist(a, 2) * inv_theta_prod(tw, 3, {2, 0}, rel)));
    }
}

TEST_CASE("lower-left coefficients of the transposed slice") {
    auto tw = Tower::make(3, 2);
    std::mt19937_64 rng(0x5eed3003ULL);
    const std::int64_t rel = 96;

    for (int rep = 0; rep < 3; ++rep) {
        Puiseux a = random_exact(rng, tw, tw->top(), 1, 0, 3);
        ExpSeries et = exp_series(make_Mt(a), 5, rel);
        auto d = [&](int m) { return et.C[static_cast<std::size_t>(m)][1][0]; };

        REQUIRE(d(0).is_exact_zero());
        REQUIRE(eq_at_prec(d(1), a * inv_theta_prod(tw, 1, {0}, rel)));
        REQUIRE(eq_at_prec(d(2), frob_twist(a, 1) * inv_theta_prod(tw, 2, {1, 0}, rel)));
        REQUIRE(eq_at_prec(d(3), a * inv_theta_prod(tw, 3, {1, 0}, rel) +
                                     frob_twist(a, 2) * inv_theta_prod(tw, 3, {2, 1, 0}, rel)));
        REQUIRE(eq_at_prec(d(4), frob_twist(a, 1) * inv_theta_prod(tw, 4, {2, 1, 0}, rel) +
                                     frob_twist(a, 3) * inv_theta_prod(tw, 4, {3, 2, 1, 0}, rel)));
        REQUIRE(eq_at_prec(d(5), a * inv_theta_prod(tw, 5, {3, 1, 0}, rel) +
                                     frob_twist(a, 2) * inv_theta_prod(tw, 5, {3, 2, 1, 0}, rel) +
                                     frob_twist(a, 4) * inv_theta_prod(tw, 5, {4, 3, 2, 1, 0}, rel)));
    }
}

TEST_CASE("evaluation is additive and certified") {
    auto tw = Tower::make(3, 2);
    std::mt19937_64 rng(0x5eed3004ULL);
    MotiveSpec ma = make_Ma(random_exact(rng, tw, tw->top(), 1, 1, 2));
    ExpSeries E = exp_series(ma, 8);

    Vec zero{Puiseux::zero(tw, 0), Puiseux::zero(tw, 0)};
    Vec out = exp_eval(E, zero);
    REQUIRE(out[0].is_exact_zero());
    REQUIRE(out[1].is_exact_zero());

    std::uniform_int_distribution<std::uint32_t> lam_pick(0, tw->q() - 1);
    for (int rep = 0; rep < 6; ++rep) {
        Vec z1 = random_col(rng, tw, 2, 0);
        Vec z2 = random_col(rng, tw, 2, 0);
        Puiseux lam = Puiseux::scalar(tw, tw->q_stage(), lam_pick(rng));
        Vec lhs = exp_eval(E, vec_add(z1, vec_scale(lam, z2)));
        Vec rhs = vec_add(exp_eval(E, z1), vec_scale(lam, exp_eval(E, z2)));
        REQUIRE(vec_eq_at_prec(lhs, rhs));
    }

    // argument far below the certified slope: the tail cannot be bounded
    ExpSeries small = exp_series(make_carlitz(tw), 1);
    Vec deep{Puiseux::monomial(tw, 0, 1, -5, 1)};
    REQUIRE_THROWS_AS(exp_eval(small, deep), TailNotConvergent);

    // adaptive order clears a requested tail bound
    ExpSeries adaptive = exp_series_auto(ma, Rational(-2), Rational(40));
    REQUIRE(tail_certificate(adaptive, Rational(-2)).bound >= Rational(40));
}

TEST_CASE("the exponential intertwines theta with the module action") {
    auto tw2 = Tower::make(2);
    auto tw3 = Tower::make(3, 2);
    std::mt19937_64 rng(0x5eed3005ULL);
    const Rational pinned(30);

    std::vector<ExpSeries> series;
    series.push_back(exp_series(make_carlitz(tw2), 8));
    series.push_back(exp_series(make_carlitz2(tw2), 8));
    series.push_back(exp_series(make_pure(random_exact(rng, tw2, tw2->top(), 1, 0, 2),
                                          random_exact(rng, tw2, tw2->top(), 1, 0, 2)),
                                8));
    series.push_back(exp_series(make_Ma(random_exact(rng, tw2, tw2->top(), 1, 1, 2)), 8));
    series.push_back(exp_series(make_Mt(random_exact(rng, tw2, tw2->top(), 1, 1, 2)), 8));
    series.push_back(exp_series(make_Ma(random_exact(rng, tw3, tw3->top(), 1, 1, 2)), 8));

    for (const auto& E : series) {
        const TowerPtr& tw = E.motive.tw;
        Vec zero(static_cast<std::size_t>(E.motive.n), Puiseux::zero(tw, 0));
        REQUIRE(check_functional_equation(E, zero) >= Rational(1000000));
        for (int rep = 0; rep < 10; ++rep) {
            Vec z = random_col(rng, tw, E.motive.n, 0);
            REQUIRE(check_functional_equation(E, z) >= pinned);
        }
    }
}
