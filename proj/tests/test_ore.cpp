#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "tmotive/ore.hpp"

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

TwistedPoly random_tp(std::mt19937_64& rng, const TowerPtr& tw, std::size_t n, int deg) {
    TwistedPoly X = TwistedPoly::zero(tw, n);
    for (int d = 0; d <= deg; ++d) {
        Mat m = mat_zero(tw, n, n);
        for (auto& row : m)
            for (auto& x : row) x = random_exact(rng, tw, tw->top(), 1, -2, 4);
        X.c.push_back(m);
    }
    X.trim();
    return X;
}

bool tp_zero_at_prec(const TwistedPoly& X) {
    for (const auto& m : X.c)
        for (const auto& row : m)
            for (const auto& x : row)
                if (x.is_nonzero()) return false;
    return true;
}

bool tp_equal_at_prec(const TwistedPoly& X, const TwistedPoly& Y) {
    return tp_zero_at_prec(ore_sub(X, Y));
}

// tau-degree-2 module action with coefficient matrix A at tau^1 and E_11 at tau^2.
TwistedPoly rank2_action(const TowerPtr& tw, const Mat& A) {
    TwistedPoly T = TwistedPoly::zero(tw, 2);
    T.c.push_back(mat_scale(Puiseux::theta(tw), mat_id(tw, 2)));
    T.c.push_back(A);
    Mat e11 = mat_zero(tw, 2, 2);
    e11[0][0] = Puiseux::one(tw);
    T.c.push_back(e11);
    return T;
}

Mat upper_coeff(const TowerPtr& tw, const Puiseux& a) {
    Mat m = mat_zero(tw, 2, 2);
    m[0][1] = a;
    m[1][1] = Puiseux::one(tw);
    return m;
}

Mat lower_coeff(const TowerPtr& tw, const Puiseux& a) {
    Mat m = mat_zero(tw, 2, 2);
    m[1][0] = a;
    m[1][1] = Puiseux::one(tw);
    return m;
}

// Every reported solution must commute with the module actions:
// action(A) * X = X * action(A').
void check_solutions_commute(const TowerPtr& tw, const Mat& A, const Mat& Ap,
                             const SemilinearResult& res) {
    TwistedPoly TA = rank2_action(tw, A);
    TwistedPoly TAp = rank2_action(tw, Ap);
    for (const auto& sol : res.basis) {
        INFO("basis solution degree " << sol.X.degree());
        REQUIRE(tp_equal_at_prec(ore_mul(TA, sol.X), ore_mul(sol.X, TAp)));
    }
    if (res.unit_exists)
        REQUIRE(tp_equal_at_prec(ore_mul(TA, res.unit_witness), ore_mul(res.unit_witness, TAp)));
}

} // namespace

TEST_CASE("twisted multiplication pushes Frobenius past tau") {
    auto tw = Tower::make(3, 2);
    Puiseux a = Puiseux::theta(tw) + Puiseux::from_ff(ff_omega(tw));

    TwistedPoly tau = TwistedPoly::zero(tw, 1);
    tau.c.push_back(mat_zero(tw, 1, 1));
    tau.c.push_back(mat_id(tw, 1));

    TwistedPoly ca = TwistedPoly::zero(tw, 1);
    ca.c.push_back(Mat{{a}});

    TwistedPoly prod = ore_mul(tau, ca);
    REQUIRE(prod.c.size() == 2);
    REQUIRE(prod.c[0][0][0].is_exact_zero());
    REQUIRE(eq_exact(prod.c[1][0][0], frob_twist(a, 1)));

    // a * tau keeps a untwisted
    TwistedPoly prod2 = ore_mul(ca, tau);
    REQUIRE(eq_exact(prod2.c[1][0][0], a));
}

TEST_CASE("identity laws and hand-expanded quadratic") {
    auto tw = Tower::make(2);
    std::mt19937_64 rng(0x5eed2001ULL);
    for (int rep = 0; rep < 10; ++rep) {
        TwistedPoly X = random_tp(rng, tw, 2, 3);
        TwistedPoly I = TwistedPoly::identity(tw, 2);
        REQUIRE(tp_equal_at_prec(ore_mul(X, I), X));
        REQUIRE(tp_equal_at_prec(ore_mul(I, X), X));
    }

    auto t9 = Tower::make(9);
    std::mt19937_64 rng9(0x5eed2002ULL);
    for (int rep = 0; rep < 10; ++rep) {
        Puiseux a = random_exact(rng9, t9, t9->top(), 1, -3, 5);
        TwistedPoly taua = TwistedPoly::zero(t9, 1); // tau + a
        taua.c.push_back(Mat{{a}});
        taua.c.push_back(mat_id(t9, 1));
        TwistedPoly taumina = TwistedPoly::zero(t9, 1); // tau - a
        taumina.c.push_back(Mat{{-a}});
        taumina.c.push_back(mat_id(t9, 1));

        // tau a = a^q tau, so (tau + a)(tau - a) = tau^2 + (a - a^q) tau - a^2
        // while the reversed order picks up the opposite middle sign.
        TwistedPoly prod = ore_mul(taua, taumina);
        REQUIRE(eq_exact(prod.c[0][0][0], -(a * a)));
        REQUIRE(eq_exact(prod.c[1][0][0], a - frob_twist(a, 1)));
        REQUIRE(eq_exact(prod.c[2][0][0], Puiseux::one(t9)));

        TwistedPoly rprod = ore_mul(taumina, taua);
        REQUIRE(eq_exact(rprod.c[0][0][0], -(a * a)));
        REQUIRE(eq_exact(rprod.c[1][0][0], frob_twist(a, 1) - a));
        REQUIRE(eq_exact(rprod.c[2][0][0], Puiseux::one(t9)));
    }
}

TEST_CASE("associativity on random triples") {
    auto tw = Tower::make(3);
    std::mt19937_64 rng(0x5eed2003ULL);
    for (int rep = 0; rep < 6; ++rep) {
        TwistedPoly X = random_tp(rng, tw, 2, 3);
        TwistedPoly Y = random_tp(rng, tw, 2, 2);
        TwistedPoly Z = random_tp(rng, tw, 2, 3);
        REQUIRE(tp_equal_at_prec(ore_mul(ore_mul(X, Y), Z), ore_mul(X, ore_mul(Y, Z))));
    }
}

TEST_CASE("unit detection by the constant term") {
    auto tw = Tower::make(2);
    REQUIRE(is_unit(TwistedPoly::identity(tw, 2)));

    TwistedPoly nillike = TwistedPoly::zero(tw, 2);
    nillike.c.push_back(mat_zero(tw, 2, 2));
    nillike.c.push_back(mat_id(tw, 2));
    REQUIRE_FALSE(is_unit(nillike));

    // upper-triangular with invertible diagonal constant term
    TwistedPoly ut = TwistedPoly::zero(tw, 2);
    Mat m0 = mat_id(tw, 2);
    m0[0][1] = Puiseux::theta(tw);
    ut.c.push_back(m0);
    REQUIRE(is_unit(ut));

    // determinant vanishing at precision only is not decidable
    TwistedPoly fuzzy = TwistedPoly::zero(tw, 2);
    Mat f0 = mat_zero(tw, 2, 2);
    f0[0][0] = Puiseux::zero_at(tw, 0, 1, 5);
    f0[1][1] = Puiseux::one(tw);
    fuzzy.c.push_back(f0);
    REQUIRE_THROWS_AS(is_unit(fuzzy), InsufficientPrecision);

    TwistedPoly big = TwistedPoly::zero(tw, 3);
    big.c.push_back(mat_id(tw, 3));
    REQUIRE_THROWS_AS(is_unit(big), ShapeError);
}

TEST_CASE("two-sided inverse modulo tau^{K+1}") {
    auto tw = Tower::make(3);
    std::mt19937_64 rng(0x5eed2004ULL);
    const int K = 4;
    for (int rep = 0; rep < 5; ++rep) {
        TwistedPoly X = random_tp(rng, tw, 2, 2);
        Mat c0 = mat_id(tw, 2); // unit constant term: I + strictly upper random
        c0[0][1] = random_exact(rng, tw, 0, 1, -2, 3);
        if (X.c.empty())
            X.c.push_back(c0);
        else
            X.c[0] = c0;

        TwistedPoly Y = ore_inverse(X, K);
        TwistedPoly XY = ore_mul(X, Y);
        TwistedPoly YX = ore_mul(Y, X);
        TwistedPoly I = TwistedPoly::identity(tw, 2);
        for (int i = 0; i <= K; ++i) {
            Mat want = I.coeff(static_cast<std::size_t>(i));
            REQUIRE(mat_is_zero_at_prec(mat_sub(XY.coeff(static_cast<std::size_t>(i)), want)));
            REQUIRE(mat_is_zero_at_prec(mat_sub(YX.coeff(static_cast<std::size_t>(i)), want)));
        }
    }
}

TEST_CASE("bounded semilinear solve: scalar automorphisms at a' = a") {
    auto tw = Tower::make(2);
    Puiseux om = Puiseux::from_ff(ff_omega(tw));
    Mat A = upper_coeff(tw, om);
    SemilinearResult res = solve_semilinear_bounded(A, A, 0);
    check_solutions_commute(tw, A, A, res);

    REQUIRE(res.dim == 1);
    REQUIRE(res.unit_exists);
    REQUIRE(res.unit_witness.degree() == 0);
    Mat w0 = res.unit_witness.coeff(0);
    REQUIRE(w0[0][1].is_exact_zero());
    REQUIRE(w0[1][0].is_exact_zero());
    // diagonal scalar pair: x11 = x22^q * a / a' = x22 for x22 in F_q
    REQUIRE(eq_at_prec(w0[0][0], w0[1][1]));
    REQUIRE_FALSE((w0[1][1] - Puiseux::one(tw)).is_nonzero());
}

TEST_CASE("bounded semilinear solve: twist by omega") {
    auto tw = Tower::make(2);
    Puiseux one = Puiseux::one(tw);
    Puiseux om = Puiseux::from_ff(ff_omega(tw));
    Mat A = upper_coeff(tw, one);
    Mat Ap = upper_coeff(tw, om);
    SemilinearResult res = solve_semilinear_bounded(A, Ap, 2);
    check_solutions_commute(tw, A, Ap, res);

    REQUIRE(res.unit_exists);
    Mat w0 = res.unit_witness.coeff(0);
    // closing relation a * x22^q = x11 * a': here x11 = x22^q / omega
    Puiseux lhs = frob_twist(w0[1][1], 1);
    Puiseux rhs = w0[0][0] * om;
    REQUIRE(eq_at_prec(lhs, rhs));
}

TEST_CASE("bounded semilinear solve: theta twist admits no unit") {
    auto tw = Tower::make(2);
    Mat A = upper_coeff(tw, Puiseux::one(tw));
    Mat Ap = upper_coeff(tw, Puiseux::theta(tw));
    for (int kmax : {0, 1, 2, 3}) {
        SemilinearResult res = solve_semilinear_bounded(A, Ap, kmax);
        check_solutions_commute(tw, A, Ap, res);
        INFO("kmax " << kmax);
        REQUIRE_FALSE(res.unit_exists);
        REQUIRE_FALSE(res.precision_doubt);
    }
}

TEST_CASE("bounded semilinear solve: commutant of the module action") {
    auto tw = Tower::make(2);
    Mat A = upper_coeff(tw, Puiseux::one(tw));
    // kmax = 2 picks up the module's own T-action as a degree-2 solution
    SemilinearResult res = solve_semilinear_bounded(A, A, 2);
    check_solutions_commute(tw, A, A, res);
    REQUIRE(res.dim >= 2);
    bool saw_deg2 = false;
    for (const auto& sol : res.basis) saw_deg2 = saw_deg2 || sol.X.degree() == 2;
    REQUIRE(saw_deg2);
    REQUIRE(res.unit_exists);
    REQUIRE(res.unit_witness.degree() == 0);

    // only degree-0 units in the whole span for small kmax
    for (int kmax : {1, 2, 3}) {
        SemilinearResult r2 = solve_semilinear_bounded(A, A, kmax);
        check_solutions_commute(tw, A, A, r2);
        REQUIRE(r2.unit_exists);
        REQUIRE(r2.unit_witness.degree() == 0);
        for (const auto& sol : r2.basis)
            if (sol.unit) REQUIRE(sol.X.degree() == 0);
    }
}

TEST_CASE("bounded semilinear solve: subfield criterion sweep") {
    auto tw = Tower::make(2);
    Puiseux th = Puiseux::theta(tw);
    std::vector<Puiseux> fq2_units;
    for (std::uint32_t i = 1; i < 4; ++i) fq2_units.push_back(Puiseux::scalar(tw, 1, i));

    for (const auto& a : fq2_units)
        for (const auto& ap : fq2_units) {
            SemilinearResult res = solve_semilinear_bounded(upper_coeff(tw, a), upper_coeff(tw, ap), 4);
            check_solutions_commute(tw, upper_coeff(tw, a), upper_coeff(tw, ap), res);
            INFO("a " << a.str() << " a' " << ap.str());
            REQUIRE(res.unit_exists);
            REQUIRE(res.unit_witness.degree() == 0);
        }

    std::vector<std::pair<Puiseux, Puiseux>> outside = {
        {Puiseux::one(tw), th},
        {fq2_units[1], th},
        {Puiseux::one(tw), th + Puiseux::one(tw)},
        {th, th * th},
        {Puiseux::one(tw), th * th + fq2_units[1]},
    };
    for (const auto& [a, ap] : outside) {
        SemilinearResult res = solve_semilinear_bounded(upper_coeff(tw, a), upper_coeff(tw, ap), 4);
        check_solutions_commute(tw, upper_coeff(tw, a), upper_coeff(tw, ap), res);
        INFO("a " << a.str() << " a' " << ap.str());
        REQUIRE_FALSE(res.unit_exists);
        REQUIRE_FALSE(res.precision_doubt);
    }
}

TEST_CASE("bounded semilinear solve: mirrored coefficient shape") {
    auto tw = Tower::make(2);
    Puiseux om = Puiseux::from_ff(ff_omega(tw));
    Mat A = lower_coeff(tw, om);
    Mat Ap = lower_coeff(tw, om * om);
    SemilinearResult res = solve_semilinear_bounded(A, Ap, 2);
    check_solutions_commute(tw, A, Ap, res);
    REQUIRE(res.unit_exists);
    REQUIRE(res.unit_witness.degree() == 0);

    Mat Bad = lower_coeff(tw, Puiseux::theta(tw));
    SemilinearResult none = solve_semilinear_bounded(A, Bad, 3);
    check_solutions_commute(tw, A, Bad, none);
    REQUIRE_FALSE(none.unit_exists);
}

TEST_CASE("bounded semilinear solve: odd characteristic") {
    auto tw = Tower::make(3, 2);
    Puiseux om = Puiseux::from_ff(ff_omega(tw));
    Mat A = upper_coeff(tw, Puiseux::one(tw));
    Mat Ap = upper_coeff(tw, om);
    SemilinearResult res = solve_semilinear_bounded(A, Ap, 1);
    check_solutions_commute(tw, A, Ap, res);
    REQUIRE(res.unit_exists);
    Mat w0 = res.unit_witness.coeff(0);
    REQUIRE(eq_at_prec(frob_twist(w0[1][1], 1), w0[0][0] * om));

    // omega^2 generates F_9^* inside F_81; theta is outside every subfield
    SemilinearResult none = solve_semilinear_bounded(A, upper_coeff(tw, Puiseux::theta(tw)), 2);
    check_solutions_commute(tw, A, upper_coeff(tw, Puiseux::theta(tw)), none);
    REQUIRE_FALSE(none.unit_exists);
}

TEST_CASE("bounded semilinear solve: shape guards") {
    auto tw = Tower::make(2);
    Mat gen = mat_id(tw, 2);
    gen[0][1] = Puiseux::theta(tw);
    REQUIRE_THROWS_AS(solve_semilinear_bounded(gen, gen, 1), SolverIncomplete);

    Mat up = upper_coeff(tw, Puiseux::one(tw));
    Mat low = lower_coeff(tw, Puiseux::one(tw));
    REQUIRE_THROWS_AS(solve_semilinear_bounded(up, low, 1), SolverIncomplete);

    Mat tall = mat_zero(tw, 3, 3);
    REQUIRE_THROWS_AS(solve_semilinear_bounded(tall, tall, 1), ShapeError);
}

TEST_CASE("bounded semilinear solve: degenerate a = 0") {
    auto tw = Tower::make(2);
    Mat A = upper_coeff(tw, Puiseux::zero(tw, 0));
    SemilinearResult res = solve_semilinear_bounded(A, A, 0);
    check_solutions_commute(tw, A, A, res);
    // decomposable module: diagonal pairs (p, t) with p in F_{q^2}, t in F_q
    REQUIRE(res.dim == 3);
    REQUIRE(res.unit_exists);
}
