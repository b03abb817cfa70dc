#pragma once

// Exact time evolution e^{-iHt}|state> and evolution with random phase insertions.
//
// Hubbard operators conserve the number of up and down fermions separately, so
// H is block diagonal over (n_up, n_down) sectors. All methods except Krylov work
// sector by sector and only touch the sectors a state actually populates; states
// themselves stay dense over the full 4^N basis.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <span>
#include <string>
#include <vector>

#include "fhlearn/fock.hpp"
#include "fhlearn/hamiltonian.hpp"
#include "fhlearn/twirl.hpp"

namespace fhlearn {

enum class EvolutionMethod { eigendecomposition, scaling_and_squaring, krylov };

struct EvolutionConfig {
    EvolutionMethod method = EvolutionMethod::eigendecomposition;
    double tolerance = 1e-10;

    void validate() const {
        if (!(tolerance > 0.0)) throw std::invalid_argument("EvolutionConfig: tolerance must be positive");
    }
};

inline constexpr Mask kUpModes = 0x55555555u;
inline constexpr Mask kDownModes = 0xAAAAAAAAu;

/// Occupation basis grouped by (n_up, n_down).
class SectorBasis {
public:
    explicit SectorBasis(int n_sites) : n_sites_(n_sites) {
        const std::size_t dim = std::size_t{1} << (2 * n_sites);
        masks_.resize((n_sites + 1) * (n_sites + 1));
        position_.resize(dim);
        for (Mask m = 0; m < dim; ++m) {
            auto& s = masks_[sector_of(m)];
            position_[m] = static_cast<int>(s.size());
            s.push_back(m);
        }
    }

    [[nodiscard]] int n_sites() const noexcept { return n_sites_; }
    [[nodiscard]] int count() const noexcept { return static_cast<int>(masks_.size()); }
    [[nodiscard]] int sector_of(Mask m) const noexcept {
        return std::popcount(m & kUpModes) * (n_sites_ + 1) + std::popcount(m & kDownModes);
    }
    [[nodiscard]] const std::vector<Mask>& masks(int sector) const { return masks_.at(sector); }
    [[nodiscard]] int position(Mask m) const { return position_.at(m); }

    /// Sectors in which the state has a nonzero amplitude.
    [[nodiscard]] std::vector<int> active(const FockVector& state) const {
        std::vector<bool> hit(masks_.size(), false);
        for (Mask m = 0; m < state.dimension(); ++m)
            if (state[m] != Complex{}) hit[sector_of(m)] = true;
        std::vector<int> out;
        for (int s = 0; s < count(); ++s)
            if (hit[s]) out.push_back(s);
        return out;
    }

    [[nodiscard]] Eigen::VectorXcd gather(const FockVector& state, int sector) const {
        const auto& ms = masks(sector);
        Eigen::VectorXcd x(ms.size());
        for (std::size_t k = 0; k < ms.size(); ++k) x[k] = state[ms[k]];
        return x;
    }

    void scatter(const Eigen::VectorXcd& x, int sector, FockVector& state) const {
        const auto& ms = masks(sector);
        for (std::size_t k = 0; k < ms.size(); ++k) state[ms[k]] = x[k];
    }

private:
    int n_sites_;
    std::vector<std::vector<Mask>> masks_;
    std::vector<int> position_;
};

/// e^{-iH tau} restricted to a set of sectors.
struct SectorPropagator {
    double tau = 0.0;
    std::vector<int> sectors;
    std::vector<Eigen::MatrixXcd> blocks;

    [[nodiscard]] const Eigen::MatrixXcd* block(int sector) const {
        for (std::size_t k = 0; k < sectors.size(); ++k)
            if (sectors[k] == sector) return &blocks[k];
        return nullptr;
    }
};

namespace detail {

inline double max_asymmetry(const SparseOperator& H) {
    SparseOperator diff = SparseOperator(H.transpose()) - H;
    double m = 0.0;
    for (int k = 0; k < diff.outerSize(); ++k)
        for (SparseOperator::InnerIterator it(diff, k); it; ++it) m = std::max(m, std::abs(it.value()));
    return m;
}

/// exp(A) by Taylor expansion with scaling and squaring.
inline Eigen::MatrixXcd expm_taylor(const Eigen::MatrixXcd& A, double tolerance) {
    const double norm1 = A.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    if (norm1 > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
    const Eigen::MatrixXcd B = A / std::ldexp(1.0, squarings);
    Eigen::MatrixXcd result = Eigen::MatrixXcd::Identity(A.rows(), A.cols());
    Eigen::MatrixXcd term = result;
    const double target = tolerance * 1e-3;
    bool converged = false;
    for (int k = 1; k <= 60; ++k) {
        term = (term * B) / static_cast<double>(k);
        result += term;
        if (term.cwiseAbs().colwise().sum().maxCoeff() < target) {
            converged = true;
            break;
        }
    }
    if (!converged) throw std::runtime_error("expm_taylor: series did not converge");
    for (int s = 0; s < squarings; ++s) result = result * result;
    return result;
}

}  // namespace detail

/// Time evolution under a fixed real-symmetric, number-conserving operator.
///
/// Sector eigendecompositions are computed on first use and cached; the cache is
/// guarded by once-flags so a const Evolver can be shared across threads.
class Evolver {
public:
    Evolver(SparseOperator H, int n_sites, EvolutionConfig cfg = {})
        : H_(std::move(H)), basis_(n_sites), cfg_(cfg) {
        cfg_.validate();
        const auto dim = static_cast<Eigen::Index>(std::size_t{1} << (2 * n_sites));
        if (H_.rows() != dim || H_.cols() != dim) throw std::invalid_argument("Evolver: operator dimension mismatch");
        double scale = 1.0;
        for (int k = 0; k < H_.outerSize(); ++k)
            for (SparseOperator::InnerIterator it(H_, k); it; ++it) {
                scale = std::max(scale, std::abs(it.value()));
                if (basis_.sector_of(static_cast<Mask>(it.row())) != basis_.sector_of(static_cast<Mask>(it.col())))
                    throw std::invalid_argument("Evolver: operator does not conserve spin-resolved particle number");
            }
        if (detail::max_asymmetry(H_) > 1e-12 * scale) throw std::invalid_argument("Evolver: operator is not Hermitian");
        spectra_ = std::make_unique<Cache[]>(basis_.count());
    }

    explicit Evolver(const HubbardModel& model, EvolutionConfig cfg = {})
        : Evolver(build_matrix(model), model.n_sites(), cfg) {}

    [[nodiscard]] const SparseOperator& matrix() const noexcept { return H_; }
    [[nodiscard]] const SectorBasis& basis() const noexcept { return basis_; }
    [[nodiscard]] const EvolutionConfig& config() const noexcept { return cfg_; }
    [[nodiscard]] int n_sites() const noexcept { return basis_.n_sites(); }

    [[nodiscard]] Eigen::MatrixXd sector_block(int sector) const {
        const auto& ms = basis_.masks(sector);
        Eigen::MatrixXd B = Eigen::MatrixXd::Zero(ms.size(), ms.size());
        for (std::size_t r = 0; r < ms.size(); ++r)
            for (SparseOperator::InnerIterator it(H_, ms[r]); it; ++it)
                B(r, basis_.position(static_cast<Mask>(it.col()))) = it.value();
        return B;
    }

    struct Spectrum {
        Eigen::VectorXd energies;
        Eigen::MatrixXd vectors;
    };

    [[nodiscard]] const Spectrum& spectrum(int sector) const {
        Cache& c = spectra_[sector];
        std::call_once(c.once, [&] {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sector_block(sector));
            if (solver.info() != Eigen::Success)
                throw std::runtime_error("Evolver: eigendecomposition failed in sector " + std::to_string(sector));
            c.value = Spectrum{solver.eigenvalues(), solver.eigenvectors()};
        });
        return *c.value;
    }

    /// e^{-iHt}|state>.
    [[nodiscard]] FockVector evolve(const FockVector& state, double t) const {
        check_state(state);
        if (t == 0.0) return state;
        if (cfg_.method == EvolutionMethod::krylov) return evolve_krylov(state, t);
        FockVector out(state.n_sites());
        for (int s : basis_.active(state)) {
            const Eigen::VectorXcd x = basis_.gather(state, s);
            Eigen::VectorXcd y;
            if (cfg_.method == EvolutionMethod::eigendecomposition) {
                const Spectrum& sp = spectrum(s);
                Eigen::VectorXcd c = sp.vectors.transpose().cast<Complex>() * x;
                for (Eigen::Index k = 0; k < c.size(); ++k) c[k] *= std::polar(1.0, -sp.energies[k] * t);
                y = sp.vectors.cast<Complex>() * c;
            } else {
                y = detail::expm_taylor(Complex{0.0, -t} * sector_block(s).cast<Complex>(), cfg_.tolerance) * x;
            }
            basis_.scatter(y, s, out);
        }
        return out;
    }

    /// Dense e^{-iH tau} blocks for the given sectors.
    [[nodiscard]] SectorPropagator propagator(double tau, const std::vector<int>& sectors) const {
        SectorPropagator p{tau, sectors, {}};
        for (int s : sectors) {
            if (cfg_.method == EvolutionMethod::scaling_and_squaring) {
                p.blocks.push_back(
                    detail::expm_taylor(Complex{0.0, -tau} * sector_block(s).cast<Complex>(), cfg_.tolerance));
                continue;
            }
            const Spectrum& sp = spectrum(s);
            Eigen::VectorXcd phases(sp.energies.size());
            for (Eigen::Index k = 0; k < phases.size(); ++k) phases[k] = std::polar(1.0, -sp.energies[k] * tau);
            const Eigen::MatrixXcd V = sp.vectors.cast<Complex>();
            p.blocks.push_back(V * phases.asDiagonal() * V.transpose());
        }
        return p;
    }

    [[nodiscard]] double expectation(const FockVector& state) const {
        check_state(state);
        return apply(state).inner(state).real();
    }

    /// H|state>.
    [[nodiscard]] FockVector apply(const FockVector& state) const {
        check_state(state);
        FockVector out(state.n_sites());
        for (int r = 0; r < H_.outerSize(); ++r) {
            Complex acc{};
            for (SparseOperator::InnerIterator it(H_, r); it; ++it) acc += it.value() * state[static_cast<Mask>(it.col())];
            out[static_cast<Mask>(r)] = acc;
        }
        return out;
    }

private:
    struct Cache {
        std::once_flag once;
        std::optional<Spectrum> value;
    };

    void check_state(const FockVector& state) const {
        if (state.n_sites() != basis_.n_sites()) throw std::invalid_argument("Evolver: state has the wrong number of sites");
    }

    Eigen::VectorXcd apply_sparse(const Eigen::VectorXcd& x) const {
        Eigen::VectorXcd y(x.size());
        for (int r = 0; r < H_.outerSize(); ++r) {
            Complex acc{};
            for (SparseOperator::InnerIterator it(H_, r); it; ++it) acc += it.value() * x[it.col()];
            y[r] = acc;
        }
        return y;
    }

    /// Lanczos propagation with adaptive substeps and full reorthogonalization.
    FockVector evolve_krylov(const FockVector& state, double t) const {
        constexpr int kMaxDim = 30;
        Eigen::VectorXcd v = Eigen::Map<const Eigen::VectorXcd>(state.amplitudes().data(), state.dimension());
        const double total = std::abs(t);
        const double sign = t < 0 ? -1.0 : 1.0;
        double done = 0.0;
        int guard = 0;
        while (done < total) {
            if (++guard > 100000) throw std::runtime_error("Evolver: Krylov propagation failed to converge");
            const double beta0 = v.norm();
            if (beta0 == 0.0) break;
            std::vector<Eigen::VectorXcd> Q{v / beta0};
            std::vector<double> alpha, beta;
            bool breakdown = false;
            for (int j = 0; j < kMaxDim; ++j) {
                Eigen::VectorXcd w = apply_sparse(Q[j]);
                alpha.push_back(Q[j].dot(w).real());
                for (const auto& q : Q) w -= q.dot(w) * q;
                const double b = w.norm();
                beta.push_back(b);
                if (b < 1e-13 * std::max(1.0, std::abs(alpha.back()))) {
                    breakdown = true;
                    break;
                }
                if (j + 1 < kMaxDim) Q.push_back(w / b);
            }
            const int m = static_cast<int>(alpha.size());
            Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
            for (int k = 0; k < m; ++k) {
                T(k, k) = alpha[k];
                if (k + 1 < m) T(k, k + 1) = T(k + 1, k) = beta[k];
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(T);
            double dt = total - done;
            Eigen::VectorXcd y;
            while (true) {
                Eigen::VectorXcd c = eig.eigenvectors().row(0).transpose().cast<Complex>();
                for (int k = 0; k < m; ++k) c[k] *= std::polar(1.0, -sign * eig.eigenvalues()[k] * dt);
                y = eig.eigenvectors().cast<Complex>() * c;
                const double err = breakdown ? 0.0 : beta0 * beta.back() * std::abs(y[m - 1]);
                if (err <= cfg_.tolerance * dt / total || dt < 1e-14 * total) break;
                dt *= 0.5;
            }
            Eigen::VectorXcd next = Eigen::VectorXcd::Zero(v.size());
            for (int k = 0; k < m; ++k) next += (beta0 * y[k]) * Q[k];
            v = std::move(next);
            done += dt;
        }
        FockVector out(state.n_sites());
        for (Eigen::Index k = 0; k < v.size(); ++k) out[static_cast<Mask>(k)] = v[k];
        return out;
    }

    SparseOperator H_;
    SectorBasis basis_;
    EvolutionConfig cfg_;
    std::unique_ptr<Cache[]> spectra_;
};

inline FockVector evolve(const FockVector& state, const SparseOperator& H, double t, const EvolutionConfig& cfg = {}) {
    return Evolver(H, state.n_sites(), cfg).evolve(state, t);
}

/// prod_{l=r..1} U_l^dag e^{-iH tau} U_l |state> for a batch of independent
/// shots, shot k drawing its twirls from rngs[k]. One precomputed step
/// propagator serves all segments.
///
/// Consecutive diagonal factors U_{l+1} U_l^dag are merged, so each segment costs
/// one phase multiply and one dense block product per populated sector, shared
/// by the whole batch.
inline std::vector<FockVector> evolve_with_insertions_batch(const FockVector& state, const SectorBasis& basis,
                                                            const SectorPropagator& step, int r,
                                                            const TwirlSpec& twirl, std::span<Rng> rngs) {
    if (r < 1) throw std::invalid_argument("evolve_with_insertions: r must be at least 1");
    twirl.validate(state.n_sites());
    const std::vector<int> active = basis.active(state);
    const std::size_t m = twirl.size();
    const auto S = static_cast<Eigen::Index>(rngs.size());

    // Phases depend on a basis state only through the twirled-site occupations,
    // so each distinct occupation pattern gets one table slot per shot.
    std::vector<std::uint32_t> patterns;
    auto pattern_of = [&](Mask mask) {
        std::uint32_t code = 0;
        for (std::size_t i = 0; i < m; ++i) code = code * 3 + site_occupation(mask, twirl.twirled_sites[i]);
        return code;
    };
    struct Block {
        const Eigen::MatrixXcd* K;
        Eigen::MatrixXcd x, tmp;
        std::vector<std::uint32_t> slot;
    };
    std::vector<Block> blocks;
    for (int s : active) {
        const Eigen::MatrixXcd* K = step.block(s);
        if (!K) throw std::invalid_argument("evolve_with_insertions: propagator misses a populated sector");
        const Eigen::VectorXcd x0 = basis.gather(state, s);
        const auto& ms = basis.masks(s);
        const auto n = static_cast<Eigen::Index>(ms.size());
        Block b{K, x0.replicate(1, S), Eigen::MatrixXcd(n, S), {}};
        for (Mask mask : ms) {
            const std::uint32_t code = pattern_of(mask);
            auto it = std::find(patterns.begin(), patterns.end(), code);
            if (it == patterns.end()) it = patterns.insert(patterns.end(), code);
            b.slot.push_back(static_cast<std::uint32_t>(it - patterns.begin()));
        }
        blocks.push_back(std::move(b));
    }
    const std::size_t P = patterns.size();
    std::vector<std::uint8_t> digits(P * m);
    for (std::size_t u = 0; u < P; ++u) {
        std::uint32_t code = patterns[u];
        for (std::size_t i = m; i-- > 0;) {
            digits[u * m + i] = static_cast<std::uint8_t>(code % 3);
            code /= 3;
        }
    }

    // prev: phase of the last insertion; step: current phase times conj(prev)
    std::vector<Complex> prev(P * rngs.size(), Complex{1.0}), merged(P * rngs.size());
    std::vector<std::array<Complex, 3>> powers(m);
    for (int l = 0; l < r; ++l) {
        for (Eigen::Index c = 0; c < S; ++c) {
            for (std::size_t i = 0; i < m; ++i) {
                const Complex z = std::polar(1.0, -sample_angle(rngs[c]));
                powers[i] = {Complex{1.0}, z, z * z};
            }
            for (std::size_t u = 0; u < P; ++u) {
                Complex p{1.0};
                for (std::size_t i = 0; i < m; ++i) p *= powers[i][digits[u * m + i]];
                merged[c * P + u] = p * std::conj(prev[c * P + u]);
                prev[c * P + u] = p;
            }
        }
        for (Block& b : blocks) {
            const Eigen::Index n = b.x.rows();
            for (Eigen::Index c = 0; c < S; ++c) {
                const Complex* f = &merged[c * P];
                Complex* x = b.x.col(c).data();
                for (Eigen::Index k = 0; k < n; ++k) x[k] *= f[b.slot[k]];
            }
            b.tmp.noalias() = (*b.K) * b.x;
            b.x.swap(b.tmp);
        }
    }
    std::vector<FockVector> out(rngs.size(), FockVector(state.n_sites()));
    for (std::size_t k = 0; k < blocks.size(); ++k) {
        Block& b = blocks[k];
        for (Eigen::Index c = 0; c < S; ++c) {
            for (Eigen::Index e = 0; e < b.x.rows(); ++e) b.x(e, c) *= std::conj(prev[c * P + b.slot[e]]);
            basis.scatter(b.x.col(c), active[k], out[c]);
        }
    }
    return out;
}

inline FockVector evolve_with_insertions(const FockVector& state, const SectorBasis& basis,
                                         const SectorPropagator& step, int r, const TwirlSpec& twirl, Rng& rng) {
    return evolve_with_insertions_batch(state, basis, step, r, twirl, std::span<Rng>(&rng, 1)).front();
}

inline FockVector evolve_with_insertions(const FockVector& state, const Evolver& evolver, double t, int r,
                                         const TwirlSpec& twirl, Rng& rng) {
    if (r < 1) throw std::invalid_argument("evolve_with_insertions: r must be at least 1");
    const SectorPropagator step = evolver.propagator(t / r, evolver.basis().active(state));
    return evolve_with_insertions(state, evolver.basis(), step, r, twirl, rng);
}

inline FockVector evolve_with_insertions(const FockVector& state, const SparseOperator& H, double t, int r,
                                         const TwirlSpec& twirl, Rng& rng, const EvolutionConfig& cfg = {}) {
    return evolve_with_insertions(state, Evolver(H, state.n_sites(), cfg), t, r, twirl, rng);
}

}  // namespace fhlearn
