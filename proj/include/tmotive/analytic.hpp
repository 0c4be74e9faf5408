#ifndef TMOTIVE_ANALYTIC_HPP
#define TMOTIVE_ANALYTIC_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <utility>
#include <vector>

#include "tmotive/motive.hpp"

namespace tmotive {

// F_q-linear series z + sum_{m>=1} g[m] z^{q^m}; g[0] is stored and must be 1.
struct AdditiveSeries {
    TowerPtr tw;
    std::vector<Puiseux> g;

    int order() const { return static_cast<int>(g.size()) - 1; }
};

inline AdditiveSeries additive_from_exp(const ExpSeries& E) {
    if (E.motive.n != 1) throw ShapeError("additive_from_exp: needs a one-dimensional module");
    AdditiveSeries f;
    f.tw = E.motive.tw;
    for (const auto& m : E.C) f.g.push_back(m[0][0]);
    return f;
}

inline Puiseux eval_additive(const AdditiveSeries& f, const Puiseux& z) {
    Puiseux s = z;
    for (int m = 1; m <= f.order(); ++m)
        if (!f.g[static_cast<std::size_t>(m)].is_exact_zero())
            s = s + f.g[static_cast<std::size_t>(m)] * frob_twist(z, static_cast<std::uint64_t>(m));
    return s;
}

inline AdditiveSeries compose_additive(const AdditiveSeries& f, const AdditiveSeries& g, int M) {
    AdditiveSeries h;
    h.tw = f.tw;
    for (int m = 0; m <= M; ++m) {
        Puiseux acc = Puiseux::zero(f.tw, 0);
        for (int i = 0; i <= m; ++i) {
            if (i > f.order() || m - i > g.order()) continue;
            acc = acc + f.g[static_cast<std::size_t>(i)] *
                            frob_twist(g.g[static_cast<std::size_t>(m - i)], static_cast<std::uint64_t>(i));
        }
        h.g.push_back(acc);
    }
    return h;
}

// Compositional inverse: g with f(g(z)) = z through order M.
inline AdditiveSeries series_inverse(const AdditiveSeries& f, int M) {
    if (f.g.empty() || !eq_at_prec(f.g[0], Puiseux::one(f.tw)))
        throw ShapeError("series_inverse: leading coefficient must be 1");
    AdditiveSeries g;
    g.tw = f.tw;
    g.g.push_back(Puiseux::one(f.tw));
    for (int m = 1; m <= M; ++m) {
        Puiseux acc = Puiseux::zero(f.tw, 0);
        for (int i = 1; i <= m && i <= f.order(); ++i)
            acc = acc + f.g[static_cast<std::size_t>(i)] *
                            frob_twist(g.g[static_cast<std::size_t>(m - i)], static_cast<std::uint64_t>(i));
        g.g.push_back(-acc);
    }
    return g;
}

// Nonzero root of z + sum g_m z^{q^m} with v_inf(root) = slope_target.
// The leading coefficient comes from the balanced terms of the Newton
// polygon; refinement is z <- z - f(z), which contracts strictly inside
// the region where the identity term dominates the increments.
inline Puiseux kernel_generator(const AdditiveSeries& f, Rational slope_target,
                                Rational target = Rational(48), int max_iter = 200) {
    const TowerPtr& tw = f.tw;
    std::uint32_t q = tw->q();
    bool have_min = false;
    Rational tmin;
    std::vector<int> support;
    for (int m = 0; m <= f.order(); ++m) {
        const Puiseux& gm = f.g[static_cast<std::size_t>(m)];
        if (!gm.is_nonzero()) continue;
        Rational t = gm.val() + slope_target * Rational(motivedetail::qpow(q, m));
        if (!have_min || t < tmin) tmin = t, have_min = true;
        support.push_back(m);
    }
    std::vector<int> bal;
    for (int m : support) {
        Rational t = f.g[static_cast<std::size_t>(m)].val() + slope_target * Rational(motivedetail::qpow(q, m));
        if (t == tmin) bal.push_back(m);
    }
    if (bal.size() < 2) throw NoSuchSlope("kernel_generator: no two terms balance at valuation " + slope_target.str());

    // leading coefficient: first gamma in index order with
    // sum over balanced m of lead(g_m) gamma^{q^m} = 0
    int top = tw->top();
    std::uint32_t gamma = 0;
    for (std::uint32_t cand = 1; cand < tw->size(top); ++cand) {
        std::uint32_t acc = 0;
        for (int m : bal) {
            std::uint32_t lead = f.g[static_cast<std::size_t>(m)].lead_coeff().idx;
            acc = tw->add(top, acc, tw->mul(top, lead, tw->frob(top, cand, static_cast<std::uint64_t>(m))));
        }
        if (acc == 0) { gamma = cand; break; }
    }
    if (!gamma) throw ContractionFailure("kernel_generator: no leading coefficient in the tower for slope " +
                                         slope_target.str());

    Puiseux z = Puiseux::monomial(tw, top, slope_target.den, slope_target.num, gamma);
    bool have_prev = false;
    Rational prev;
    for (int it = 0; it < max_iter; ++it) {
        Puiseux r = eval_additive(f, z);
        if (!r.is_nonzero()) {
            if (r.val_lower() < target)
                throw ContractionFailure("kernel_generator: arithmetic precision exhausted at residual " +
                                         r.val_lower().str());
            return z;
        }
        Rational rv = r.val();
        if (rv >= target) return z - r;
        if (have_prev && !(prev < rv))
            throw ContractionFailure("kernel_generator: residual stalled at valuation " + rv.str());
        prev = rv, have_prev = true;
        z = z - r;
    }
    throw ContractionFailure("kernel_generator: iteration limit reached");
}

struct PeriodData {
    Puiseux pi1, pi2;
    Rational res1, res2; // certified valuations of the exponentials at the generators
};

namespace analyticdetail {

inline PeriodData compute_periods(const TowerPtr& tw, Rational target, std::int64_t rel) {
    auto q = static_cast<std::int64_t>(tw->q());
    PeriodData P;
    Rational mu1(-q, q - 1);
    ExpSeries E1 = exp_series_auto(make_carlitz(tw), mu1, target, rel);
    P.pi1 = kernel_generator(additive_from_exp(E1), mu1, target);
    Puiseux r1 = exp_eval(E1, Vec{P.pi1})[0];
    if (r1.is_nonzero()) throw ContractionFailure("periods: first generator fails its residual check");
    P.res1 = r1.val_lower();

    Rational mu2(-q * q, q * q - 1);
    ExpSeries E2 = exp_series_auto(make_carlitz2(tw), mu2, target, rel);
    P.pi2 = kernel_generator(additive_from_exp(E2), mu2, target);
    Puiseux r2 = exp_eval(E2, Vec{P.pi2})[0];
    if (r2.is_nonzero()) throw ContractionFailure("periods: second generator fails its residual check");
    P.res2 = r2.val_lower();
    return P;
}

} // namespace analyticdetail

// Cached per configuration; computing a period is pure, so a plain
// lock-around-map is all the coordination needed.
inline const PeriodData& periods(const TowerPtr& tw, Rational target = Rational(48), std::int64_t rel = 96) {
    using Key = std::tuple<std::uint32_t, int, std::int64_t, std::int64_t, std::int64_t>;
    static std::map<Key, std::unique_ptr<PeriodData>> cache;
    static std::mutex mu;
    Key key{tw->q(), tw->stages(), target.num, target.den, rel};
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, std::make_unique<PeriodData>(analyticdetail::compute_periods(tw, target, rel))).first;
    return *it->second;
}

inline bool carlitz_lattice_check(const Puiseux& z, Rational target = Rational(32), std::int64_t rel = 96) {
    if (z.is_exact_zero()) return true;
    ExpSeries E = exp_series_auto(make_carlitz(z.tw), z.val_lower(), target, rel);
    return !exp_eval(E, Vec{z})[0].is_nonzero();
}

// Logarithm of a one-dimensional module with the slope certificate that
// controls both its own tail and the evaluation domain: every computed
// coefficient of exp and log satisfies v(coeff) >= lambda (q^m - 1), the
// recurrences propagate that bound past the truncation provided the module
// coefficients have nonnegative valuation, and eval at w converges iff
// v(w) > -lambda.
struct LogSeries {
    AdditiveSeries log;
    Rational lambda;
};

inline LogSeries log_series_1d(const MotiveSpec& m1, int M, std::int64_t rel = 96) {
    if (m1.n != 1) throw ShapeError("log_series_1d: needs a one-dimensional module");
    for (const auto& a : m1.A)
        if (motivedetail::mat_val_floor(a) < Rational(0))
            throw ShapeError("log_series_1d: module coefficients must have nonnegative valuation");
    LogSeries L;
    ExpSeries E = exp_series(m1, M, rel);
    AdditiveSeries f = additive_from_exp(E);
    L.log = series_inverse(f, M);
    L.lambda = motivedetail::kInfValuation;
    for (int m = 1; m <= M; ++m) {
        Rational d(motivedetail::qpow(m1.tw->q(), m) - 1);
        Rational rf = f.g[static_cast<std::size_t>(m)].val_lower() / d;
        Rational rl = L.log.g[static_cast<std::size_t>(m)].val_lower() / d;
        if (rf < L.lambda) L.lambda = rf;
        if (rl < L.lambda) L.lambda = rl;
    }
    return L;
}

inline Puiseux log_eval_1d(const MotiveSpec& m1, const Puiseux& w,
                           Rational target = Rational(48), std::int64_t rel = 96) {
    if (w.is_exact_zero()) return w;
    Rational vw = w.val_lower();
    std::uint32_t q = m1.tw->q();
    for (int M = m1.k(); M <= 64; ++M) {
        LogSeries L = log_series_1d(m1, M, rel);
        if (!(-L.lambda < vw))
            throw OutsideLogDomain("log: argument valuation " + vw.str() + " not above " + (-L.lambda).str());
        Rational tail = Rational(motivedetail::qpow(q, M + 1)) * (L.lambda + vw) - L.lambda;
        if (target <= tail) {
            Puiseux z = eval_additive(L.log, w);
            std::int64_t num = tail.num * z.e, den = tail.den;
            std::int64_t slots = num / den - ((num % den != 0 && (num < 0) != (den < 0)) ? 1 : 0);
            return trunc_abs(z, slots, z.e);
        }
    }
    throw OutsideLogDomain("log: argument valuation " + vw.str() + " too close to the domain boundary");
}

inline LogSeries carlitz_log(const TowerPtr& tw, int M, std::int64_t rel = 96) {
    return log_series_1d(make_carlitz(tw), M, rel);
}

inline Puiseux carlitz_log_eval(const TowerPtr& tw, const Puiseux& w,
                                Rational target = Rational(48), std::int64_t rel = 96) {
    return log_eval_1d(make_carlitz(tw), w, target, rel);
}

// D, D_omega and the grouped coefficients d_0..d_2 of D(a) as a series in a.
struct DSeries {
    Puiseux D, Domega;
    std::vector<Puiseux> frakd; // frakd[i] multiplies a^{q^i}
    Rational agreement;         // valuation of D - sum_i frakd_i a^{q^i}
    Rational cutoff;            // bound below which the dropped i >= 3 terms cannot reach
};

namespace analyticdetail {

// Denominator pattern of the a^{q^i}-coefficient of the order-m entry:
// lower indices m-2, m-4, ... while above i, then i, i-1, ..., 0.
inline Puiseux grouped_term(const TowerPtr& tw, const Puiseux& pi2, int m, int i, std::int64_t rel) {
    Puiseux denom = Puiseux::one(tw);
    for (int l = m - 2; l > i; l -= 2) denom = denom * theta_diff(tw, m, l);
    for (int l = i; l >= 0; --l) denom = denom * theta_diff(tw, m, l);
    return frob_twist(pi2, static_cast<std::uint64_t>(m)) * inv_to(denom, rel);
}

} // namespace analyticdetail

inline DSeries d_series(const Puiseux& a, Rational target = Rational(48), std::int64_t rel = 96) {
    const TowerPtr& tw = a.tw;
    const PeriodData& P = periods(tw, target, rel);
    DSeries out;

    Rational vpi2 = P.pi2.val();
    ExpSeries E = exp_series_auto(make_Mt(a), vpi2, target, rel);
    Puiseux omega = Puiseux::from_ff(ff_omega(tw));
    Vec col = exp_eval(E, Vec{P.pi2, Puiseux::zero(tw, 0)});
    Vec colw = exp_eval(E, Vec{omega * P.pi2, Puiseux::zero(tw, 0)});
    if (col[0].is_nonzero() || colw[0].is_nonzero())
        throw ContractionFailure("d_series: the rank-2 generator fails its kernel check");
    out.D = col[1];
    out.Domega = colw[1];

    for (int i = 0; i <= 2; ++i) {
        Puiseux s = Puiseux::zero(tw, 0);
        int m = i + 1;
        Rational u;
        for (;; m += 2) {
            if (m > 30) throw TailNotConvergent("d_series: grouped sum did not clear the target");
            int lows = i + 1 + (m - i - 1) / 2;
            u = Rational(motivedetail::qpow(tw->q(), m)) * (vpi2 + Rational(lows));
            if (m > i + 1 && target <= u) break;
            s = s + analyticdetail::grouped_term(tw, P.pi2, m, i, rel);
        }
        std::int64_t num = u.num * s.e, den = u.den;
        std::int64_t slots = num / den - ((num % den != 0 && (num < 0) != (den < 0)) ? 1 : 0);
        out.frakd.push_back(trunc_abs(s, slots, s.e));
    }

    Puiseux rhs = out.frakd[0] * a + out.frakd[1] * frob_twist(a, 1) + out.frakd[2] * frob_twist(a, 2);
    out.cutoff = Rational(motivedetail::qpow(tw->q(), 3)) * a.val_lower() +
                 Rational(motivedetail::qpow(tw->q(), 4)) * (vpi2 + Rational(4));
    Puiseux r = out.D - rhs;
    if (r.is_nonzero() && r.val() < out.cutoff)
        throw ContractionFailure("d_series: grouped sums disagree with the direct evaluation");
    out.agreement = r.val_lower();
    return out;
}

struct SiegelPoint {
    Puiseux s, z22, z32;
};

inline SiegelPoint siegel_s(const Puiseux& a, Rational target = Rational(48), std::int64_t rel = 96) {
    const TowerPtr& tw = a.tw;
    const PeriodData& P = periods(tw, target, rel);
    DSeries ds = d_series(a, target, rel);
    Puiseux omega = Puiseux::from_ff(ff_omega(tw));
    SiegelPoint out;
    out.z22 = carlitz_log_eval(tw, -ds.D, target, rel);
    out.z32 = carlitz_log_eval(tw, -ds.Domega, target, rel);
    Puiseux numer = out.z32 - omega * out.z22;
    out.s = numer.is_exact_zero() ? numer : div_to(numer, P.pi1, rel);
    return out;
}

struct InversePoint {
    Puiseux a;
    Rational neighborhood; // certified lower bound on v(a) for the contraction
    Rational residual;     // achieved valuation of s(a) - s11
};

inline InversePoint local_inverse_s(const Puiseux& s11, Rational target = Rational(40), std::int64_t rel = 96) {
    const TowerPtr& tw = s11.tw;
    auto q = static_cast<std::int64_t>(tw->q());
    InversePoint out;
    const PeriodData& P = periods(tw, Rational(48) < target ? target : Rational(48), rel);
    DSeries ds = d_series(Puiseux::zero(tw, 0), Rational(48) < target ? target : Rational(48), rel);
    Puiseux omega = Puiseux::from_ff(ff_omega(tw));
    Puiseux ombar = Puiseux::from_ff(ff_omega(tw).frob(1));
    Puiseux c = div_to(ds.frakd[0] * (omega - ombar), P.pi1, rel);

    // contraction region from the first competing increments: the a^q and
    // a^{q^2} groups of D, and the first two log nonlinearities applied to
    // the leading group
    LogSeries L = carlitz_log(tw, 2, rel);
    Rational v0 = ds.frakd[0].val();
    Rational wmin = (v0 - ds.frakd[1].val()) / Rational(q - 1);
    Rational w2 = (v0 - ds.frakd[2].val()) / Rational(q * q - 1);
    if (wmin < w2) wmin = w2;
    Rational w3 = -L.log.g[1].val() / Rational(q - 1) - v0;
    if (wmin < w3) wmin = w3;
    Rational w4 = -L.log.g[2].val() / Rational(q * q - 1) - v0;
    if (wmin < w4) wmin = w4;
    out.neighborhood = wmin + c.val();

    if (s11.is_exact_zero()) {
        out.a = s11;
        out.residual = motivedetail::kInfValuation;
        return out;
    }
    if (!s11.is_nonzero())
        throw OutsideNeighborhood("local_inverse_s: target is zero at its precision");
    if (!(out.neighborhood < s11.val()))
        throw OutsideNeighborhood("local_inverse_s: v(target) = " + s11.val().str() +
                                  " needs to exceed " + out.neighborhood.str());

    // rel counts slots of the divisor's ramification, so convert it to hold
    // the intended number of whole valuation units
    Puiseux a = div_to(s11, c, rel * c.e);
    bool have_prev = false;
    Rational prev;
    for (int it = 0; it < 60; ++it) {
        Puiseux r = siegel_s(a, target, rel).s - s11;
        if (!r.is_nonzero()) {
            out.a = a;
            out.residual = r.val_lower();
            return out;
        }
        Rational rv = r.val();
        if (rv >= target) {
            out.a = a;
            out.residual = rv;
            return out;
        }
        if (have_prev && !(prev < rv))
            throw OutsideNeighborhood("local_inverse_s: iteration stalled at residual valuation " + rv.str());
        prev = rv, have_prev = true;
        a = a - div_to(r, c, rel * c.e);
    }
    throw OutsideNeighborhood("local_inverse_s: iteration limit reached");
}

} // namespace tmotive

#endif
