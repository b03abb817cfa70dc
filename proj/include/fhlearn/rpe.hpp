#pragma once

// Robust phase estimation.
//
// Level j uses evolution time 2^j and a noisy estimate Z_j of e^{i 2^j phi}. The
// candidates (2k pi + arg Z_j) / 2^j are spaced 2pi / 2^j apart; the one closest
// (on the circle) to the previous estimate is kept. As long as every
// |Z_j - e^{i 2^j phi}| < sqrt3/2, phi stays within pi / (3 2^j) of the estimate.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace fhlearn {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct RpeSchedule {
    double epsilon;
    double eta;
    int levels;  ///< J; levels 0..J are run
    int shots;   ///< N_s, split evenly between the cos and sin signals

    [[nodiscard]] int shots_per_quadrature() const noexcept { return shots / 2; }

    /// sum_j N_s 2^j = N_s (2^{J+1} - 1)
    [[nodiscard]] double total_evolution_time() const noexcept {
        return static_cast<double>(shots) * (std::ldexp(1.0, levels + 1) - 1.0);
    }
};

namespace detail {

/// ceil that absorbs rounding noise just above an integer (log2(16) may evaluate to 4 + ulp).
inline double ceil_tolerant(double x) {
    const double r = std::round(x);
    if (std::abs(x - r) <= 1e-12 * std::max(1.0, std::abs(x))) return r;
    return std::ceil(x);
}

}  // namespace detail

/// J = ceil(log2(3 / (pi eps))), N_s = 2 ceil(9 (ln(4/eta) + ln(J + 1))).
inline RpeSchedule rpe_schedule(double epsilon, double eta) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("rpe_schedule: epsilon must lie in (0, 1)");
    if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("rpe_schedule: eta must lie in (0, 1)");
    const int J = static_cast<int>(detail::ceil_tolerant(std::log2(3.0 / (std::numbers::pi * epsilon))));
    const int levels = std::max(J, 0);
    const double inner = 9.0 * (std::log(4.0 / eta) + std::log(static_cast<double>(J) + 1.0));
    const int shots = 2 * static_cast<int>(detail::ceil_tolerant(inner));
    return {epsilon, eta, levels, shots};
}

struct SignalRecord {
    int level;
    std::complex<double> z;
    int shots_used;
};

struct RpeState {
    double theta = 0.0;  ///< in [0, 2pi)
    int level = -1;
};

inline double wrap_2pi(double x) {
    double y = std::fmod(x, kTwoPi);
    if (y < 0.0) y += kTwoPi;
    return y >= kTwoPi ? 0.0 : y;
}

/// Maps an angle into (-pi, pi].
inline double wrap_pi(double x) {
    double y = wrap_2pi(x);
    return y > std::numbers::pi ? y - kTwoPi : y;
}

inline double circular_distance(double a, double b) {
    const double d = wrap_2pi(a - b);
    return std::min(d, kTwoPi - d);
}

/// One refinement step from a given argument of Z_j.
inline RpeState rpe_refine_angle(const RpeState& state, double arg_z) {
    const int j = state.level + 1;
    if (j > 52) throw std::invalid_argument("rpe_refine: level too deep for double precision");
    const double scale = std::ldexp(1.0, j);
    const double base = wrap_2pi(arg_z);
    const long long count = 1LL << j;
    // Scan near the nearest candidate only; distances beyond +-1 step cannot win.
    const long long guess = static_cast<long long>(std::llround((state.theta * scale - base) / kTwoPi));
    double best = 0.0, best_dist = INFINITY;
    for (long long k = guess - 1; k <= guess + 1; ++k) {
        const long long kk = ((k % count) + count) % count;
        const double cand = wrap_2pi((kTwoPi * static_cast<double>(kk) + base) / scale);
        const double d = circular_distance(cand, state.theta);
        if (d < best_dist - 1e-15 || (std::abs(d - best_dist) <= 1e-15 && cand < best)) {
            best = cand;
            best_dist = d;
        }
    }
    return {best, j};
}

inline RpeState rpe_refine(const RpeState& state, std::complex<double> z) {
    if (z == std::complex<double>{}) throw std::invalid_argument("rpe_refine: Z_j = 0 has no argument");
    return rpe_refine_angle(state, std::arg(z));
}

/// Runs levels 0..J and returns every intermediate state.
inline std::vector<RpeState> rpe_trace(const std::function<std::complex<double>(int)>& provider,
                                       const RpeSchedule& schedule) {
    std::vector<RpeState> trace;
    RpeState s;
    for (int j = 0; j <= schedule.levels; ++j) {
        s = rpe_refine(s, provider(j));
        trace.push_back(s);
    }
    return trace;
}

/// Phase estimate in (-pi, pi].
inline double rpe_run(const std::function<std::complex<double>(int)>& provider, double epsilon, double eta) {
    return wrap_pi(rpe_trace(provider, rpe_schedule(epsilon, eta)).back().theta);
}

}  // namespace fhlearn
