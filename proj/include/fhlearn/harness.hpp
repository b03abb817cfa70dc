#pragma once

// Experiment orchestration: run configuration, learn runs scored against ground
// truth, scaling sweeps, and a small worker pool.
//
// Workers come from FHLEARN_WORKERS (default: hardware concurrency). Every trial
// owns a substream of the root seed, so the worker count never changes results.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "fhlearn/hamiltonian.hpp"
#include "fhlearn/protocol.hpp"
#include "fhlearn/verify.hpp"

namespace fhlearn {

/// Largest system learn accepts in shot mode without `allow_large`.
inline constexpr int kShotModeSiteLimit = 8;

struct RunConfig {
    double epsilon = 0.05;
    double eta = 0.1;
    std::uint64_t seed = 1;
    AcquisitionMode mode = AcquisitionMode::shot;
    double calibration_constant = kDefaultCalibration;
    MeasureMode measure_mode = MeasureMode::faithful;
    std::string out;
    bool allow_large = false;

    void validate() const {
        if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
        if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("eta must lie in (0, 1)");
        if (!(calibration_constant > 0.0) || !std::isfinite(calibration_constant))
            throw std::invalid_argument("calibration constant must be positive");
    }

    [[nodiscard]] LearnConfig learn_config() const {
        LearnConfig c;
        c.mode = mode;
        c.measure_mode = measure_mode;
        c.calibration_constant = calibration_constant;
        return c;
    }
};

struct RunReport {
    RunConfig config;
    HubbardModel instance;
    LearnReport learn;

    /// |estimate - truth| per target, in report target order.
    [[nodiscard]] std::vector<double> errors() const {
        std::vector<double> out;
        for (const auto& t : learn.targets) {
            const double truth = t.kind == TargetKind::hopping ? instance.hopping_on(t.edge) : instance.interaction.at(t.site);
            out.push_back(std::abs(t.estimate - truth));
        }
        return out;
    }
    [[nodiscard]] double max_error() const {
        const auto e = errors();
        return e.empty() ? 0.0 : *std::max_element(e.begin(), e.end());
    }
    [[nodiscard]] bool all_within_epsilon() const { return max_error() < config.epsilon; }
};

inline void check_size_guard(const HubbardModel& model, const RunConfig& config) {
    if (config.mode == AcquisitionMode::shot && model.n_sites() > kShotModeSiteLimit && !config.allow_large)
        throw std::invalid_argument("learn: " + std::to_string(model.n_sites()) + " sites exceeds the shot-mode limit of " +
                                    std::to_string(kShotModeSiteLimit) + " (pass the override flag to force)");
}

inline RunReport run_learn(const HubbardModel& model, const RunConfig& config) {
    config.validate();
    require_valid(model);
    check_size_guard(model, config);
    return {config, model, learn(model, config.epsilon, config.eta, config.learn_config(), config.seed)};
}

/// FHLEARN_WORKERS if set to a positive integer, else the hardware concurrency.
inline int worker_count() {
    if (const char* env = std::getenv("FHLEARN_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<int>(std::min<long>(v, 1024));
        throw std::invalid_argument("FHLEARN_WORKERS must be a positive integer");
    }
    return static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
}

/// Runs task(i) for i in [0, count) on up to `workers` threads. The first
/// exception thrown by any task is rethrown after all threads stop.
inline void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& task) {
    workers = std::max(1, std::min<int>(workers, static_cast<int>(count)));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_lock;
    auto body = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < count;) {
            try {
                task(i);
            } catch (...) {
                std::lock_guard lock(error_lock);
                if (!error) error = std::current_exception();
                next = count;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

struct ScalingRow {
    double epsilon;
    double total_evolution_time;
    std::int64_t experiments;
    std::int64_t insertions;
    double max_error;
};

struct ScalingSweep {
    std::vector<double> epsilons;
    int trials = 1;
    std::vector<ScalingRow> rows;  ///< epsilon-major, trial-minor
};

inline constexpr const char* kScalingCsvHeader = "epsilon,total_evolution_time,experiments,insertions,max_error";

/// Trial k at epsilon index e uses seed stream_seed(config.seed, {e, k}).
inline ScalingSweep run_scaling(const HubbardModel& model, const std::vector<double>& epsilons, int trials,
                                const RunConfig& config, int workers = worker_count()) {
    if (epsilons.size() < 3) throw std::invalid_argument("scaling: need at least three epsilon values");
    if (trials < 1) throw std::invalid_argument("scaling: need at least one trial");
    config.validate();
    for (double e : epsilons)
        if (!(e > 0.0 && e < 1.0)) throw std::invalid_argument("scaling: epsilon values must lie in (0, 1)");
    require_valid(model);
    check_size_guard(model, config);
    ScalingSweep sweep{epsilons, trials, std::vector<ScalingRow>(epsilons.size() * trials)};
    parallel_for(sweep.rows.size(), workers, [&](std::size_t i) {
        const std::size_t e = i / trials, k = i % trials;
        RunConfig c = config;
        c.epsilon = epsilons[e];
        c.seed = stream_seed(config.seed, {e, k});
        const RunReport rep = run_learn(model, c);
        sweep.rows[i] = {epsilons[e], rep.learn.counters.total_evolution_time, rep.learn.counters.experiments,
                         rep.learn.counters.insertions, rep.max_error()};
    });
    return sweep;
}

inline std::string scaling_csv(const ScalingSweep& sweep) {
    std::ostringstream os;
    os.precision(17);
    os << kScalingCsvHeader << '\n';
    for (const auto& r : sweep.rows)
        os << r.epsilon << ',' << r.total_evolution_time << ',' << r.experiments << ',' << r.insertions << ','
           << r.max_error << '\n';
    return os.str();
}

struct ScalingFits {
    FitResult time;         ///< total evolution time vs 1/epsilon
    FitResult insertions;   ///< insertions vs 1/epsilon
    FitResult experiments;  ///< experiments vs 1/epsilon
};

/// Log-log fits of the per-epsilon trial means against 1/epsilon.
inline ScalingFits fit_scaling(const ScalingSweep& sweep) {
    std::vector<std::pair<double, double>> time, ins, exps;
    for (std::size_t e = 0; e < sweep.epsilons.size(); ++e) {
        double t = 0, i = 0, x = 0;
        for (int k = 0; k < sweep.trials; ++k) {
            const auto& r = sweep.rows[e * sweep.trials + k];
            t += r.total_evolution_time;
            i += static_cast<double>(r.insertions);
            x += static_cast<double>(r.experiments);
        }
        const double inv = 1.0 / sweep.epsilons[e];
        time.emplace_back(inv, t / sweep.trials);
        ins.emplace_back(inv, i / sweep.trials);
        exps.emplace_back(inv, x / sweep.trials);
    }
    return {fit_loglog(time), fit_loglog(ins), fit_loglog(exps)};
}

}  // namespace fhlearn
