#pragma once

// Phase twirls U = prod_{i in S} exp(-i theta_i (n_{i up} + n_{i down})), theta_i ~ U[0, 2pi).
// U is diagonal in the occupation basis, so it is stored as one angle per site.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "fhlearn/fock.hpp"

namespace fhlearn {

struct TwirlSpec {
    std::vector<int> twirled_sites;  ///< ascending, distinct

    static TwirlSpec of(std::vector<int> sites) {
        std::sort(sites.begin(), sites.end());
        sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
        return TwirlSpec{std::move(sites)};
    }

    /// All sites in [0, n_sites) that are not in `kept`.
    static TwirlSpec complement_of(int n_sites, const std::vector<int>& kept) {
        std::vector<int> sites;
        for (int i = 0; i < n_sites; ++i)
            if (std::find(kept.begin(), kept.end(), i) == kept.end()) sites.push_back(i);
        return TwirlSpec{std::move(sites)};
    }

    [[nodiscard]] bool empty() const noexcept { return twirled_sites.empty(); }
    [[nodiscard]] std::size_t size() const noexcept { return twirled_sites.size(); }
    [[nodiscard]] bool contains(int site) const {
        return std::binary_search(twirled_sites.begin(), twirled_sites.end(), site);
    }

    [[nodiscard]] Mask mode_mask() const noexcept {
        Mask m = 0;
        for (int s : twirled_sites) m |= site_mask(s);
        return m;
    }

    void validate(int n_sites) const {
        for (std::size_t k = 0; k < twirled_sites.size(); ++k) {
            if (twirled_sites[k] < 0 || twirled_sites[k] >= n_sites)
                throw std::out_of_range("TwirlSpec: twirled site outside [0, n_sites)");
            if (k > 0 && twirled_sites[k - 1] >= twirled_sites[k])
                throw std::invalid_argument("TwirlSpec: sites must be ascending and distinct");
        }
    }
};

struct SampledTwirl {
    std::vector<int> sites;
    std::vector<double> angles;

    /// exp(-i sum_i theta_i occ_i(mask)).
    [[nodiscard]] Complex phase(Mask mask) const {
        double a = 0.0;
        for (std::size_t k = 0; k < sites.size(); ++k) a += angles[k] * site_occupation(mask, sites[k]);
        return std::polar(1.0, -a);
    }
};

/// One angle per twirled site, uniform on [0, 2pi), drawn in site order.
inline double sample_angle(Rng& rng) { return 2.0 * std::numbers::pi * uniform01(rng); }

inline SampledTwirl sample_twirl(const TwirlSpec& spec, Rng& rng) {
    SampledTwirl out{spec.twirled_sites, {}};
    out.angles.reserve(spec.size());
    for (std::size_t k = 0; k < spec.size(); ++k) out.angles.push_back(sample_angle(rng));
    return out;
}

/// U|state>, or U^dag|state> when `inverse`.
inline FockVector apply_twirl(const FockVector& state, const SampledTwirl& twirl, bool inverse) {
    for (int s : twirl.sites)
        if (s < 0 || s >= state.n_sites()) throw std::out_of_range("apply_twirl: site outside the state");
    FockVector out = state;
    for (Mask mask = 0; mask < out.dimension(); ++mask) {
        if (out[mask] == Complex{}) continue;
        const Complex p = twirl.phase(mask);
        out[mask] *= inverse ? std::conj(p) : p;
    }
    return out;
}

}  // namespace fhlearn
