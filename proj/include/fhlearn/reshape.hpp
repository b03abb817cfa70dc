#pragma once

// Hamiltonian reshaping by random phase insertions.
//
// For the phase twirl on a site set S, E[U^dag H U] keeps every interaction term
// and every hopping between two untwirled sites, and averages every hopping that
// touches S to zero. The finite-r insertion product approximates e^{-i H_eff t}
// with an O(t^2 / r) error.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "fhlearn/evolution.hpp"
#include "fhlearn/fock.hpp"
#include "fhlearn/hamiltonian.hpp"
#include "fhlearn/twirl.hpp"

namespace fhlearn {

/// Per-quadrature reshaping budget (sqrt3/2 - 2/3)/4.
inline const double kReshapeBudget = (std::sqrt(3.0) / 2.0 - 2.0 / 3.0) / 4.0;

/// Default constant C in r = ceil(C t^2 / budget): twice the largest
/// |deviation| * r / t^2 from tools/calibrate_reshaping (0.9295), rounded up.
inline constexpr double kDefaultCalibration = 1.86;

struct ReshapeRun {
    double t;
    int r;

    [[nodiscard]] double tau() const noexcept { return t / r; }
};

inline HubbardModel effective_hamiltonian(const HubbardModel& model, const TwirlSpec& spec) {
    spec.validate(model.n_sites());
    HubbardModel out = model;
    const auto& edges = model.graph.edges();
    for (std::size_t k = 0; k < edges.size(); ++k)
        if (spec.contains(edges[k].first) || spec.contains(edges[k].second)) out.hopping[k] = 0.0;
    return out;
}

/// r = max(1, ceil(C t^2 / budget)).
inline int choose_r(double t, double error_budget, double calibration_constant = kDefaultCalibration) {
    if (!(t > 0.0) || !(error_budget > 0.0) || !(calibration_constant > 0.0))
        throw std::invalid_argument("choose_r: t, budget and calibration constant must be positive");
    const double r = std::ceil(calibration_constant * t * t / error_budget);
    if (r > 2e9) throw std::overflow_error("choose_r: step count overflows");
    return std::max(1, static_cast<int>(r));
}

struct ChannelErrorEstimate {
    double deviation;       ///< |mean - exact|
    double standard_error;  ///< Monte-Carlo standard error of the mean
    double mean;            ///< sample mean of <O> over insertion realizations
    double exact;           ///< <O> under e^{-i H_eff t}
};

/// Monte-Carlo estimate of the reshaping error for one observable.
///
/// Each realization draws its insertions from its own substream of a base seed
/// taken from `rng`, so realizations can be evaluated in any order.
inline ChannelErrorEstimate channel_error_estimate(const HubbardModel& model, const TwirlSpec& spec,
                                                   const ProjectorSpec& observable, const FockVector& initial,
                                                   double t, int r, int n_samples, Rng& rng) {
    if (n_samples < 2) throw std::invalid_argument("channel_error_estimate: need at least two samples");
    if (r < 1) throw std::invalid_argument("channel_error_estimate: r must be at least 1");
    spec.validate(model.n_sites());
    if (observable.support_mask() & spec.mode_mask())
        throw std::invalid_argument("channel_error_estimate: observable support intersects twirled sites");

    const Evolver reshaped(effective_hamiltonian(model, spec));
    const double exact = projector_expectation(reshaped.evolve(initial, t), observable);

    const Evolver full(model);
    const SectorPropagator step = full.propagator(t / r, full.basis().active(initial));
    const std::uint64_t base = rng();
    double sum = 0.0, sum_sq = 0.0;
    constexpr int kBatch = 64;
    for (int first = 0; first < n_samples; first += kBatch) {
        std::vector<Rng> streams;
        for (int k = first; k < std::min(n_samples, first + kBatch); ++k)
            streams.push_back(make_stream(base, {static_cast<std::uint64_t>(k)}));
        for (const FockVector& out : evolve_with_insertions_batch(initial, full.basis(), step, r, spec, streams)) {
            const double p = projector_expectation(out, observable);
            sum += p;
            sum_sq += p * p;
        }
    }
    const double mean = sum / n_samples;
    const double var = std::max(0.0, (sum_sq - n_samples * mean * mean) / (n_samples - 1));
    return {std::abs(mean - exact), std::sqrt(var / n_samples), mean, exact};
}

}  // namespace fhlearn
