#pragma once

// Fermionic Fock space over 2N spin-orbitals.
//
// Mode m = 2*site + spin (up = 0, down = 1). A basis state is an occupation
// bitmask; bit m set means mode m is occupied, and the mask denotes the wedge
// product of its occupied modes in ascending order. Creation on mode m picks up
// (-1)^(number of occupied modes below m), which reproduces the left-wedge
// definition c^dag |a> = |m> ^ |a> after reordering into ascending order.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fhlearn/random.hpp"

namespace fhlearn {

using Complex = std::complex<double>;
using Mask = std::uint32_t;

inline constexpr int kMaxSites = 10;
inline constexpr Complex kI{0.0, 1.0};

enum class Spin : std::uint8_t { up = 0, down = 1 };

class ModeIndex {
public:
    constexpr explicit ModeIndex(int value) : value_(value) {}

    [[nodiscard]] constexpr int value() const noexcept { return value_; }
    [[nodiscard]] constexpr int site() const noexcept { return value_ / 2; }
    [[nodiscard]] constexpr Spin spin() const noexcept { return value_ % 2 == 0 ? Spin::up : Spin::down; }
    [[nodiscard]] constexpr Mask bit() const noexcept { return Mask{1} << value_; }

    constexpr auto operator<=>(const ModeIndex&) const = default;

private:
    int value_;
};

inline ModeIndex mode_index(int site, Spin spin, int n_sites) {
    if (site < 0 || site >= n_sites)
        throw std::out_of_range("mode_index: site " + std::to_string(site) + " outside [0, " +
                                std::to_string(n_sites) + ")");
    return ModeIndex(2 * site + static_cast<int>(spin));
}

/// Both spin-orbitals of a site.
constexpr Mask site_mask(int site) noexcept { return Mask{3} << (2 * site); }

/// Occupation (0, 1 or 2) of a site in a basis mask.
constexpr int site_occupation(Mask mask, int site) noexcept {
    return std::popcount(mask & site_mask(site));
}

/// Parity of the number of occupied modes strictly below mode m.
constexpr int parity_below(Mask mask, int m) noexcept {
    return std::popcount(mask & ((Mask{1} << m) - 1)) & 1;
}

/// Sign that sorts the word (modes of x, ascending) ^ (modes of rest, ascending)
/// into canonical ascending order. x and rest must be disjoint.
constexpr int reorder_sign(Mask x, Mask rest) noexcept {
    int parity = 0;
    for (Mask bits = x; bits != 0; bits &= bits - 1) parity ^= parity_below(rest, std::countr_zero(bits));
    return parity ? -1 : 1;
}

struct LadderTerm {
    Mask mask;
    int sign;
};

inline std::optional<LadderTerm> create(Mask mask, int m) noexcept {
    const Mask bit = Mask{1} << m;
    if (mask & bit) return std::nullopt;
    return LadderTerm{mask | bit, parity_below(mask, m) ? -1 : 1};
}

inline std::optional<LadderTerm> annihilate(Mask mask, int m) noexcept {
    const Mask bit = Mask{1} << m;
    if (!(mask & bit)) return std::nullopt;
    return LadderTerm{mask & ~bit, parity_below(mask, m) ? -1 : 1};
}

/// Dense amplitude vector over the 4^N occupation basis.
class FockVector {
public:
    explicit FockVector(int n_sites) : n_sites_(n_sites) {
        if (n_sites < 0 || n_sites > kMaxSites)
            throw std::invalid_argument("FockVector: n_sites must lie in [0, " + std::to_string(kMaxSites) + "]");
        amps_.assign(std::size_t{1} << (2 * n_sites), Complex{});
    }

    static FockVector vacuum(int n_sites) { return basis(n_sites, 0); }

    static FockVector basis(int n_sites, Mask mask, Complex amplitude = 1.0) {
        FockVector v(n_sites);
        v.at(mask) = amplitude;
        return v;
    }

    [[nodiscard]] int n_sites() const noexcept { return n_sites_; }
    [[nodiscard]] int n_modes() const noexcept { return 2 * n_sites_; }
    [[nodiscard]] std::size_t dimension() const noexcept { return amps_.size(); }

    Complex& operator[](Mask mask) noexcept { return amps_[mask]; }
    const Complex& operator[](Mask mask) const noexcept { return amps_[mask]; }

    Complex& at(Mask mask) {
        if (mask >= amps_.size()) throw std::out_of_range("FockVector: mask outside the basis");
        return amps_[mask];
    }
    [[nodiscard]] const Complex& at(Mask mask) const {
        if (mask >= amps_.size()) throw std::out_of_range("FockVector: mask outside the basis");
        return amps_[mask];
    }

    std::span<Complex> amplitudes() noexcept { return amps_; }
    [[nodiscard]] std::span<const Complex> amplitudes() const noexcept { return amps_; }

    [[nodiscard]] double norm_squared() const noexcept {
        double s = 0.0;
        for (const Complex& a : amps_) s += std::norm(a);
        return s;
    }
    [[nodiscard]] double norm() const noexcept { return std::sqrt(norm_squared()); }

    /// <this|other>
    [[nodiscard]] Complex inner(const FockVector& other) const {
        require_same_shape(other);
        Complex s{};
        for (std::size_t k = 0; k < amps_.size(); ++k) s += std::conj(amps_[k]) * other.amps_[k];
        return s;
    }

    /// Union of the modes occupied in any basis state with a nonzero amplitude.
    [[nodiscard]] Mask occupied_modes() const noexcept {
        Mask modes = 0;
        for (std::size_t k = 0; k < amps_.size(); ++k)
            if (amps_[k] != Complex{}) modes |= static_cast<Mask>(k);
        return modes;
    }

    [[nodiscard]] double max_abs_difference(const FockVector& other) const {
        require_same_shape(other);
        double d = 0.0;
        for (std::size_t k = 0; k < amps_.size(); ++k) d = std::max(d, std::abs(amps_[k] - other.amps_[k]));
        return d;
    }

    FockVector& operator+=(const FockVector& other) {
        require_same_shape(other);
        for (std::size_t k = 0; k < amps_.size(); ++k) amps_[k] += other.amps_[k];
        return *this;
    }
    FockVector& operator-=(const FockVector& other) {
        require_same_shape(other);
        for (std::size_t k = 0; k < amps_.size(); ++k) amps_[k] -= other.amps_[k];
        return *this;
    }
    FockVector& operator*=(Complex scale) noexcept {
        for (Complex& a : amps_) a *= scale;
        return *this;
    }

    friend FockVector operator+(FockVector a, const FockVector& b) { return a += b; }
    friend FockVector operator-(FockVector a, const FockVector& b) { return a -= b; }
    friend FockVector operator*(Complex s, FockVector v) { return v *= s; }

private:
    void require_same_shape(const FockVector& other) const {
        if (other.n_sites_ != n_sites_) throw std::invalid_argument("FockVector: mismatched number of sites");
    }

    int n_sites_;
    std::vector<Complex> amps_;
};

inline void check_mode(const FockVector& state, ModeIndex m) {
    if (m.value() < 0 || m.value() >= state.n_modes())
        throw std::out_of_range("mode " + std::to_string(m.value()) + " outside the state's modes");
}

inline FockVector apply_creation(const FockVector& state, ModeIndex m) {
    check_mode(state, m);
    FockVector out(state.n_sites());
    for (Mask mask = 0; mask < state.dimension(); ++mask) {
        if (state[mask] == Complex{}) continue;
        if (auto term = create(mask, m.value())) out[term->mask] += static_cast<double>(term->sign) * state[mask];
    }
    return out;
}

inline FockVector apply_annihilation(const FockVector& state, ModeIndex m) {
    check_mode(state, m);
    FockVector out(state.n_sites());
    for (Mask mask = 0; mask < state.dimension(); ++mask) {
        if (state[mask] == Complex{}) continue;
        if (auto term = annihilate(mask, m.value())) out[term->mask] += static_cast<double>(term->sign) * state[mask];
    }
    return out;
}

inline Mask support_sites_mask(const FockVector& state) {
    Mask sites = 0;
    const Mask modes = state.occupied_modes();
    for (int s = 0; s < state.n_sites(); ++s)
        if (modes & site_mask(s)) sites |= Mask{1} << s;
    return sites;
}

/// a ^ b for states on disjoint sets of sites: the creation word of a followed by
/// the creation word of b, re-expressed in canonical mode order.
inline FockVector wedge_product(const FockVector& a, const FockVector& b) {
    if (a.n_sites() != b.n_sites()) throw std::invalid_argument("wedge_product: mismatched number of sites");
    if (support_sites_mask(a) & support_sites_mask(b))
        throw std::invalid_argument("wedge_product: states have overlapping site supports");
    FockVector out(a.n_sites());
    for (Mask x = 0; x < a.dimension(); ++x) {
        if (a[x] == Complex{}) continue;
        for (Mask y = 0; y < b.dimension(); ++y) {
            if (b[y] == Complex{}) continue;
            out[x | y] += static_cast<double>(reorder_sign(x, y)) * a[x] * b[y];
        }
    }
    return out;
}

enum class Variant : std::uint8_t { plain, tilde };

/// (|-> + |updown>_site)/sqrt2, or with a factor i on the doubly occupied part.
inline FockVector prepare_site_psi(int n_sites, int site, Variant variant) {
    if (site < 0 || site >= n_sites) throw std::out_of_range("prepare_site_psi: site out of range");
    FockVector v(n_sites);
    const double h = 1.0 / std::sqrt(2.0);
    v[0] = h;
    v[site_mask(site)] = variant == Variant::plain ? Complex{h, 0.0} : Complex{0.0, h};
    return v;
}

/// |up>_k1 (plain), or ((1+i)/2)|up>_k1 + ((1-i)/2)|up>_k2 (tilde).
inline FockVector prepare_pair_phi(int n_sites, int k1, int k2, Variant variant) {
    if (k1 == k2) throw std::invalid_argument("prepare_pair_phi: sites must differ");
    if (k1 < 0 || k1 >= n_sites || k2 < 0 || k2 >= n_sites)
        throw std::out_of_range("prepare_pair_phi: site out of range");
    FockVector v(n_sites);
    const Mask up1 = mode_index(k1, Spin::up, n_sites).bit();
    const Mask up2 = mode_index(k2, Spin::up, n_sites).bit();
    if (variant == Variant::plain) {
        v[up1] = 1.0;
    } else {
        v[up1] = Complex{0.5, 0.5};
        v[up2] = Complex{0.5, -0.5};
    }
    return v;
}

/// Projector |target><target| on the modes in `support`, identity elsewhere.
///
/// `support` is strictly ascending; local basis bit k stands for support[k], and
/// `target` has 2^|support| amplitudes. The target must have definite particle
/// parity so that the projector is an even operator.
struct ProjectorSpec {
    std::vector<ModeIndex> support;
    std::vector<Complex> target;

    [[nodiscard]] Mask support_mask() const noexcept {
        Mask m = 0;
        for (ModeIndex mode : support) m |= mode.bit();
        return m;
    }

    /// Global mask of local basis state x.
    [[nodiscard]] Mask deposit(Mask local) const noexcept {
        Mask g = 0;
        for (std::size_t k = 0; k < support.size(); ++k)
            if (local & (Mask{1} << k)) g |= support[k].bit();
        return g;
    }

    void validate(int n_sites) const {
        for (std::size_t k = 0; k < support.size(); ++k) {
            if (support[k].value() < 0 || support[k].value() >= 2 * n_sites)
                throw std::out_of_range("ProjectorSpec: support mode outside the state's modes");
            if (k > 0 && !(support[k - 1] < support[k]))
                throw std::invalid_argument("ProjectorSpec: support must be strictly ascending");
        }
        if (target.size() != (std::size_t{1} << support.size()))
            throw std::invalid_argument("ProjectorSpec: target length must be 2^|support|");
        double norm2 = 0.0;
        int parity = -1;
        for (Mask x = 0; x < target.size(); ++x) {
            if (target[x] == Complex{}) continue;
            norm2 += std::norm(target[x]);
            const int p = std::popcount(x) & 1;
            if (parity >= 0 && p != parity)
                throw std::invalid_argument("ProjectorSpec: target must have definite parity");
            parity = p;
        }
        if (std::abs(norm2 - 1.0) > 1e-12) throw std::invalid_argument("ProjectorSpec: target must be normalized");
    }

    /// Projector onto a state that lives on the given sites (all their modes).
    static ProjectorSpec onto(const FockVector& state, std::vector<int> sites) {
        std::sort(sites.begin(), sites.end());
        ProjectorSpec p;
        for (int s : sites) {
            p.support.push_back(mode_index(s, Spin::up, state.n_sites()));
            p.support.push_back(mode_index(s, Spin::down, state.n_sites()));
        }
        const Mask supp = p.support_mask();
        for (Mask g = 0; g < state.dimension(); ++g)
            if (state[g] != Complex{} && (g & ~supp))
                throw std::invalid_argument("ProjectorSpec::onto: state is not supported on the given sites");
        p.target.resize(std::size_t{1} << p.support.size());
        for (Mask x = 0; x < p.target.size(); ++x) p.target[x] = state[p.deposit(x)];
        p.validate(state.n_sites());
        return p;
    }

    /// O_i = |psi><psi| on one site.
    static ProjectorSpec site_psi(int n_sites, int site) {
        return onto(prepare_site_psi(n_sites, site, Variant::plain), {site});
    }

    /// O^(2) = |phi><phi| on the two sites of an edge.
    static ProjectorSpec pair_phi(int n_sites, int k1, int k2) {
        return onto(prepare_pair_phi(n_sites, k1, k2, Variant::plain), {k1, k2});
    }
};

namespace detail {

/// Calls f(rest) for every mask of the complement of `support` within `full`.
template <typename F>
void for_each_rest(Mask full, Mask support, F&& f) {
    const Mask comp = full & ~support;
    Mask rest = comp;
    while (true) {
        f(rest);
        if (rest == 0) break;
        rest = (rest - 1) & comp;
    }
}

struct LocalBasis {
    std::vector<Mask> global;
    std::vector<Complex> target;
};

inline LocalBasis local_basis(const ProjectorSpec& proj) {
    LocalBasis b;
    for (Mask x = 0; x < proj.target.size(); ++x) {
        if (proj.target[x] == Complex{}) continue;
        b.global.push_back(proj.deposit(x));
        b.target.push_back(proj.target[x]);
    }
    return b;
}

inline Mask full_mask(const FockVector& s) {
    return static_cast<Mask>(s.dimension() - 1);
}

}  // namespace detail

/// P|state> for P = |target><target| (x) I.
inline FockVector apply_projector(const FockVector& state, const ProjectorSpec& proj) {
    proj.validate(state.n_sites());
    const auto local = detail::local_basis(proj);
    FockVector out(state.n_sites());
    detail::for_each_rest(detail::full_mask(state), proj.support_mask(), [&](Mask rest) {
        Complex overlap{};
        for (std::size_t k = 0; k < local.global.size(); ++k)
            overlap += std::conj(local.target[k]) * static_cast<double>(reorder_sign(local.global[k], rest)) *
                       state[local.global[k] | rest];
        if (overlap == Complex{}) return;
        for (std::size_t k = 0; k < local.global.size(); ++k)
            out[local.global[k] | rest] +=
                static_cast<double>(reorder_sign(local.global[k], rest)) * local.target[k] * overlap;
    });
    return out;
}

/// <state| P (x) I |state>, clamped into [0, 1].
inline double projector_expectation(const FockVector& state, const ProjectorSpec& proj) {
    proj.validate(state.n_sites());
    const auto local = detail::local_basis(proj);
    double total = 0.0;
    detail::for_each_rest(detail::full_mask(state), proj.support_mask(), [&](Mask rest) {
        Complex overlap{};
        for (std::size_t k = 0; k < local.global.size(); ++k)
            overlap += std::conj(local.target[k]) * static_cast<double>(reorder_sign(local.global[k], rest)) *
                       state[local.global[k] | rest];
        total += std::norm(overlap);
    });
    return std::clamp(total, 0.0, 1.0);
}

enum class MeasureMode : std::uint8_t {
    faithful,       ///< sequential sampling with collapse
    fast_marginal,  ///< independent draws from each marginal, no collapse
};

struct MeasurementResult {
    std::vector<bool> outcomes;
    FockVector collapsed;
};

/// Measures commuting projectors with pairwise disjoint supports.
inline MeasurementResult projective_measure(const FockVector& state, std::span<const ProjectorSpec> projectors,
                                            Rng& rng, MeasureMode mode = MeasureMode::faithful) {
    Mask seen = 0;
    for (const auto& p : projectors) {
        p.validate(state.n_sites());
        if (seen & p.support_mask()) throw std::invalid_argument("projective_measure: overlapping supports");
        seen |= p.support_mask();
    }
    MeasurementResult result{{}, state};
    result.outcomes.reserve(projectors.size());
    for (const auto& p : projectors) {
        if (mode == MeasureMode::fast_marginal) {
            result.outcomes.push_back(uniform01(rng) < projector_expectation(state, p));
            continue;
        }
        FockVector projected = apply_projector(result.collapsed, p);
        const double prob = std::clamp(projected.norm_squared() / result.collapsed.norm_squared(), 0.0, 1.0);
        const bool hit = uniform01(rng) < prob;
        FockVector branch = hit ? std::move(projected) : result.collapsed - projected;
        const double n = branch.norm();
        if (n > 0.0) branch *= 1.0 / n;
        result.collapsed = std::move(branch);
        result.outcomes.push_back(hit);
    }
    return result;
}

}  // namespace fhlearn
