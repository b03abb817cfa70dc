#pragma once

// Brute-force references for the analytic shortcuts used elsewhere: tensor-grid
// twirl averages, exact signals, the exact twirl-averaged insertion channel, and
// log-log least-squares fits for scaling laws.

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fhlearn/evolution.hpp"
#include "fhlearn/fock.hpp"
#include "fhlearn/hamiltonian.hpp"
#include "fhlearn/twirl.hpp"

namespace fhlearn {

struct FitResult {
    double slope;
    double intercept;
    double r_squared;
    std::vector<std::pair<double, double>> points;
};

/// Least-squares line through (ln x, ln y).
inline FitResult fit_loglog(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3) throw std::invalid_argument("fit_loglog: need at least three points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (auto [x, y] : points) {
        if (!(x > 0.0) || !(y > 0.0)) throw std::invalid_argument("fit_loglog: values must be positive");
        const double lx = std::log(x), ly = std::log(y);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        syy += ly * ly;
    }
    const double n = static_cast<double>(points.size());
    const double cxx = sxx - sx * sx / n, cxy = sxy - sx * sy / n, cyy = syy - sy * sy / n;
    if (cxx <= 1e-12 * std::max(1.0, sxx)) throw std::invalid_argument("fit_loglog: x values must not all coincide");
    const double slope = cxy / cxx;
    const double intercept = (sy - slope * sx) / n;
    const double r2 = cyy <= 0.0 ? 1.0 : std::clamp(cxy * cxy / (cxx * cyy), 0.0, 1.0);
    return {slope, intercept, r2, points};
}

/// Average of U(theta)^dag H U(theta) over a K^|S| grid of equally spaced angles.
inline Eigen::MatrixXcd quadrature_effective_hamiltonian(const HubbardModel& model, const TwirlSpec& spec, int K) {
    if (spec.size() > 3) throw std::invalid_argument("quadrature_effective_hamiltonian: at most 3 twirled sites");
    if (K < 5) throw std::invalid_argument("quadrature_effective_hamiltonian: need K >= 5");
    spec.validate(model.n_sites());
    const SparseOperator H = build_matrix(model);
    const auto dim = H.rows();
    Eigen::MatrixXcd avg = Eigen::MatrixXcd::Zero(dim, dim);
    const std::size_t m = spec.size();
    std::size_t points = 1;
    for (std::size_t i = 0; i < m; ++i) points *= static_cast<std::size_t>(K);
    std::vector<Complex> u(dim);
    SampledTwirl tw{spec.twirled_sites, std::vector<double>(m)};
    for (std::size_t g = 0; g < points; ++g) {
        std::size_t rem = g;
        for (std::size_t i = 0; i < m; ++i) {
            tw.angles[i] = 2.0 * std::numbers::pi * static_cast<double>(rem % K) / K;
            rem /= K;
        }
        for (Eigen::Index a = 0; a < dim; ++a) u[a] = tw.phase(static_cast<Mask>(a));
        for (int r = 0; r < H.outerSize(); ++r)
            for (SparseOperator::InnerIterator it(H, r); it; ++it)
                avg(it.row(), it.col()) += std::conj(u[it.row()]) * it.value() * u[it.col()];
    }
    return avg / static_cast<double>(points);
}

/// <O> after exact evolution under the model, no sampling.
inline double exact_signal(const HubbardModel& model, const FockVector& initial, const ProjectorSpec& proj, double t) {
    return projector_expectation(Evolver(model).evolve(initial, t), proj);
}

/// E[<O>] after r twirled segments, computed exactly on the density matrix.
///
/// The twirl average of U^dag K U rho U^dag K^dag U keeps exactly the matrix
/// elements whose twirled-site charge occ(a) - occ(b) matches the charge of the
/// rho element they came from, so each segment is a sum over charge classes of
/// K rho_q K^dag filtered back to class q. No random numbers are involved.
inline double twirled_channel_expectation(const HubbardModel& model, const TwirlSpec& spec,
                                          const FockVector& initial, const ProjectorSpec& observable, double t,
                                          int r) {
    if (r < 1) throw std::invalid_argument("twirled_channel_expectation: r must be at least 1");
    spec.validate(model.n_sites());
    const Evolver evolver(model);
    const SectorBasis& basis = evolver.basis();
    const std::vector<int> sectors = basis.active(initial);
    std::vector<Mask> masks;
    for (int s : sectors) masks.insert(masks.end(), basis.masks(s).begin(), basis.masks(s).end());
    const auto D = static_cast<Eigen::Index>(masks.size());
    if (static_cast<double>(D) * D * D > 5e8)
        throw std::invalid_argument("twirled_channel_expectation: active subspace too large");

    const SectorPropagator step = evolver.propagator(t / r, sectors);
    Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(D, D);
    Eigen::Index offset = 0;
    for (std::size_t k = 0; k < sectors.size(); ++k) {
        const auto n = step.blocks[k].rows();
        K.block(offset, offset, n, n) = step.blocks[k];
        offset += n;
    }

    // charge label per basis state: base-5 digits of (occupation + 2) per twirled site
    std::vector<int> occ_code(D);
    for (Eigen::Index a = 0; a < D; ++a) {
        int code = 0;
        for (int s : spec.twirled_sites) code = code * 5 + site_occupation(masks[a], s);
        occ_code[a] = code;
    }
    auto charge = [&](Eigen::Index a, Eigen::Index b) {
        int ca = occ_code[a], cb = occ_code[b], label = 0, mult = 1;
        for (std::size_t i = 0; i < spec.size(); ++i) {
            label += ((ca % 5) - (cb % 5) + 4) * mult;
            ca /= 5;
            cb /= 5;
            mult *= 9;
        }
        return label;
    };
    std::vector<int> label(D * D);
    for (Eigen::Index a = 0; a < D; ++a)
        for (Eigen::Index b = 0; b < D; ++b) label[a * D + b] = charge(a, b);

    Eigen::VectorXcd psi(D);
    for (Eigen::Index a = 0; a < D; ++a) psi[a] = initial[masks[a]];
    Eigen::MatrixXcd rho = psi * psi.adjoint();
    for (int l = 0; l < r; ++l) {
        std::map<int, Eigen::MatrixXcd> parts;
        for (Eigen::Index a = 0; a < D; ++a)
            for (Eigen::Index b = 0; b < D; ++b) {
                if (rho(a, b) == Complex{}) continue;
                auto [it, fresh] = parts.try_emplace(label[a * D + b]);
                if (fresh) it->second = Eigen::MatrixXcd::Zero(D, D);
                it->second(a, b) = rho(a, b);
            }
        Eigen::MatrixXcd next = Eigen::MatrixXcd::Zero(D, D);
        for (auto& [q, part] : parts) {
            const Eigen::MatrixXcd moved = K * part * K.adjoint();
            for (Eigen::Index a = 0; a < D; ++a)
                for (Eigen::Index b = 0; b < D; ++b)
                    if (label[a * D + b] == q) next(a, b) += moved(a, b);
        }
        rho = std::move(next);
    }

    // Tr(O rho) with O restricted to the active subspace
    double value = 0.0;
    for (Eigen::Index a = 0; a < D; ++a) {
        const FockVector col = apply_projector(FockVector::basis(initial.n_sites(), masks[a]), observable);
        for (Eigen::Index b = 0; b < D; ++b) value += (col[masks[b]] * rho(a, b)).real();
    }
    return value;
}

}  // namespace fhlearn
