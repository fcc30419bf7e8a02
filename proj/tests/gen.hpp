#pragma once

// Small random generators shared by the property tests.

#include <cstdint>
#include <random>
#include <vector>

#include "sigma/core.hpp"

namespace gen {

struct Rng {
    std::mt19937_64 eng;
    explicit Rng(std::uint64_t seed) : eng(seed) {}
    std::size_t below(std::size_t n) { return n ? std::size_t(eng() % n) : 0; }
    bool coin() { return eng() & 1; }
};

inline std::vector<sigma::Elem> list(Rng& r, std::size_t carrier, std::size_t lo, std::size_t hi) {
    std::vector<sigma::Elem> v(lo + r.below(hi - lo + 1));
    for (auto& x : v) x = sigma::Elem(r.below(carrier));
    return v;
}

// Explicit family with distinct labels below max_label.
inline sigma::Family explicit_family(Rng& r, std::size_t carrier, std::size_t max_size, std::size_t max_label) {
    std::vector<std::pair<sigma::Label, sigma::Elem>> es;
    std::vector<bool> used(max_label, false);
    std::size_t n = r.below(max_size + 1);
    for (std::size_t k = 0; k < n; ++k) {
        sigma::Label l = r.below(max_label);
        if (used[l]) continue;
        used[l] = true;
        es.emplace_back(l, sigma::Elem(r.below(carrier)));
    }
    return sigma::Family::labeled(es);
}

inline sigma::Family transfinite_family(Rng& r, std::size_t carrier, std::size_t max_blocks = 2) {
    sigma::Transfinite t;
    std::size_t blocks = 1 + r.below(max_blocks);
    for (std::size_t b = 0; b < blocks; ++b) t.blocks.push_back({list(r, carrier, 0, 3), list(r, carrier, 1, 4)});
    t.final = list(r, carrier, 0, 2);
    return sigma::Family(t);
}

inline sigma::Multiset multiset(Rng& r, std::size_t carrier, std::size_t support, sigma::Mult max_count) {
    sigma::Multiset m;
    std::size_t k = r.below(support + 1);
    for (std::size_t i = 0; i < k; ++i) {
        sigma::Elem x = sigma::Elem(r.below(carrier));
        m.counts[x] = r.below(4) == 0 ? sigma::kOmega : sigma::Mult(1 + r.below(max_count));
    }
    return m;
}

}  // namespace gen
