#ifndef TMOTIVE_SAMPLING_HPP
#define TMOTIVE_SAMPLING_HPP

#include <cstdint>
#include <random>

#include "tmotive/elim.hpp"

namespace tmotive {

// Deterministic instance generator: identical seeds give identical draws on
// every platform, which keeps seeded reports byte-reproducible.
class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : rng_(seed) {}

    std::uint32_t below(std::uint32_t n) { return static_cast<std::uint32_t>(rng_() % n); }

    FF ff(const TowerPtr& tw, int stage) { return {tw, stage, below(tw->size(stage))}; }

    FF ff_nonzero(const TowerPtr& tw, int stage) { return {tw, stage, 1 + below(tw->size(stage) - 1)}; }

    // Exact Laurent polynomial in theta over the given stage with slots in
    // [lo_slot, hi_slot]; slot s carries theta^{-s}.
    Puiseux scalar(const TowerPtr& tw, int stage, std::int64_t lo_slot, std::int64_t hi_slot) {
        Puiseux r = Puiseux::zero(tw, stage);
        for (std::int64_t s = lo_slot; s <= hi_slot; ++s) {
            std::uint32_t idx = below(tw->size(stage));
            if (idx) r = r + Puiseux::monomial(tw, stage, 1, s, idx);
        }
        return r;
    }

    Puiseux scalar_nonzero(const TowerPtr& tw, int stage, std::int64_t lo_slot, std::int64_t hi_slot) {
        for (;;) {
            Puiseux r = scalar(tw, stage, lo_slot, hi_slot);
            if (r.is_nonzero()) return r;
        }
    }

    TPoly tpoly(const TowerPtr& tw, int stage, std::size_t order, std::int64_t lo_slot, std::int64_t hi_slot) {
        TPoly r = TPoly::zero(tw);
        r.c.reserve(order + 1);
        for (std::size_t j = 0; j <= order; ++j) r.c.push_back(scalar(tw, stage, lo_slot, hi_slot));
        return r;
    }

private:
    std::mt19937_64 rng_;
};

} // namespace tmotive

#endif
