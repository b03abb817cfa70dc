#pragma once

// The learning protocol: per color class, three passes (hoppings, first
// endpoints, second endpoints), each running levels j = 0..J with a cos-type and
// a sin-type signal, reshaped evolution for t = 2^j, and simultaneous projective
// measurement of every target in the pass. Robust phase estimation turns the
// per-level signals into estimates.
//
// A hopping target sees the two eigenphases -h and +h of its |up>_k1 +- |up>_k2
// pair, so its signal oscillates at 2h: phase estimation recovers 2h and the
// estimate is halved. A site already learned in an earlier color is not
// measured again; a pass left without targets is skipped.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fhlearn/coloring.hpp"
#include "fhlearn/evolution.hpp"
#include "fhlearn/fock.hpp"
#include "fhlearn/hamiltonian.hpp"
#include "fhlearn/random.hpp"
#include "fhlearn/reshape.hpp"
#include "fhlearn/rpe.hpp"
#include "fhlearn/twirl.hpp"

namespace fhlearn {

enum class TargetKind : std::uint8_t { hopping, interaction };
enum class Quadrature : std::uint8_t { cos_type, sin_type };
enum class AcquisitionMode : std::uint8_t {
    shot,   ///< Bernoulli outcomes from projective measurement
    exact,  ///< outcome probabilities in place of outcomes
};

/// One (color, target group) pass.
struct PassPlan {
    int color = 0;
    TargetKind kind = TargetKind::hopping;
    int endpoint = 0;          ///< 1 or 2 for endpoint passes; 0 for hopping and isolated sites
    std::vector<Edge> edges;   ///< hopping targets
    std::vector<int> sites;    ///< interaction targets
    TwirlSpec twirl;

    [[nodiscard]] std::size_t target_count() const noexcept {
        return kind == TargetKind::hopping ? edges.size() : sites.size();
    }
};

/// Passes in execution order. Twirls: V \ V_c for hoppings, V \ V_cm for endpoints.
/// Isolated sites, if any, share one last pass tagged with color num_colors.
inline std::vector<PassPlan> plan_passes(const InteractionGraph& graph, const ColorPartition& partition) {
    std::vector<PassPlan> out;
    std::vector<bool> learned(graph.n_sites(), false);
    for (int c = 0; c < partition.num_colors; ++c) {
        const ColorClass& cls = color_sets(partition, c);
        PassPlan hop;
        hop.color = c;
        hop.kind = TargetKind::hopping;
        hop.edges = cls.edges;
        hop.twirl = TwirlSpec::complement_of(graph.n_sites(), cls.vertices);
        out.push_back(std::move(hop));
        for (int m : {1, 2}) {
            const auto& group = m == 1 ? cls.first_vertices : cls.second_vertices;
            PassPlan p;
            p.color = c;
            p.kind = TargetKind::interaction;
            p.endpoint = m;
            for (int s : group)
                if (!learned[s]) p.sites.push_back(s);
            if (p.sites.empty()) continue;
            for (int s : p.sites) learned[s] = true;
            p.twirl = TwirlSpec::complement_of(graph.n_sites(), group);
            out.push_back(std::move(p));
        }
    }
    // sites with no edges belong to no color class
    PassPlan isolated;
    isolated.color = partition.num_colors;
    isolated.kind = TargetKind::interaction;
    for (int s = 0; s < graph.n_sites(); ++s)
        if (!learned[s]) isolated.sites.push_back(s);
    if (!isolated.sites.empty()) {
        isolated.twirl = TwirlSpec::complement_of(graph.n_sites(), isolated.sites);
        out.push_back(std::move(isolated));
    }
    return out;
}

/// Wedge product of the per-target initial states; untouched sites stay empty.
inline FockVector pass_initial_state(const PassPlan& pass, Quadrature q, int n_sites) {
    const Variant v = q == Quadrature::cos_type ? Variant::plain : Variant::tilde;
    FockVector state = FockVector::vacuum(n_sites);
    if (pass.kind == TargetKind::hopping) {
        for (const Edge& e : pass.edges) state = wedge_product(state, prepare_pair_phi(n_sites, e.first, e.second, v));
    } else {
        for (int s : pass.sites) state = wedge_product(state, prepare_site_psi(n_sites, s, v));
    }
    return state;
}

inline std::vector<ProjectorSpec> pass_observables(const PassPlan& pass, int n_sites) {
    std::vector<ProjectorSpec> out;
    if (pass.kind == TargetKind::hopping) {
        for (const Edge& e : pass.edges) out.push_back(ProjectorSpec::pair_phi(n_sites, e.first, e.second));
    } else {
        for (int s : pass.sites) out.push_back(ProjectorSpec::site_psi(n_sites, s));
    }
    return out;
}

struct ExperimentPlan {
    PassPlan pass;
    int level = 0;
    Quadrature quadrature = Quadrature::cos_type;
    double time = 1.0;  ///< 2^level in the protocol
    int shots = 1;      ///< N_s / 2 in the protocol
    int insertions = 1; ///< r

    void validate(int n_sites) const {
        if (shots < 1) throw std::invalid_argument("ExperimentPlan: need at least one shot");
        if (insertions < 1) throw std::invalid_argument("ExperimentPlan: r must be at least 1");
        pass.twirl.validate(n_sites);
        std::vector<int> kept = pass.sites;
        for (const Edge& e : pass.edges) {
            kept.push_back(e.first);
            kept.push_back(e.second);
        }
        for (int s : kept) {
            if (s < 0 || s >= n_sites) throw std::out_of_range("ExperimentPlan: target outside the system");
            if (pass.twirl.contains(s)) throw std::invalid_argument("ExperimentPlan: target site is twirled");
        }
    }
};

struct CostCounters {
    double total_evolution_time = 0.0;
    std::int64_t experiments = 0;
    std::int64_t insertions = 0;  ///< single-site unitaries: r * |twirled sites| per run

    void add_run(double t, int r, std::size_t twirled) {
        total_evolution_time += t;
        experiments += 1;
        insertions += static_cast<std::int64_t>(r) * static_cast<std::int64_t>(twirled);
    }
    CostCounters& operator+=(const CostCounters& o) {
        total_evolution_time += o.total_evolution_time;
        experiments += o.experiments;
        insertions += o.insertions;
        return *this;
    }
    bool operator==(const CostCounters&) const = default;
};

inline constexpr int kShotBatch = 64;

struct AcquisitionOptions {
    AcquisitionMode mode = AcquisitionMode::shot;
    MeasureMode measure_mode = MeasureMode::faithful;
};

/// Per-target estimates 2 * mean(outcome) - 1 of cos (or sin) of the target phase.
///
/// Shot k of the plan draws all its randomness from make_stream(seed, {k});
/// shots are simulated in fixed batches of kShotBatch.
inline std::vector<double> acquire_signal(const ExperimentPlan& plan, const Evolver& evolver, std::uint64_t seed,
                                          const AcquisitionOptions& options, CostCounters* counters = nullptr,
                                          const SectorPropagator* step = nullptr) {
    const int n = evolver.n_sites();
    plan.validate(n);
    const FockVector initial = pass_initial_state(plan.pass, plan.quadrature, n);
    const std::vector<ProjectorSpec> observables = pass_observables(plan.pass, n);
    std::optional<SectorPropagator> own;
    if (!step) {
        own = evolver.propagator(plan.time / plan.insertions, evolver.basis().active(initial));
        step = &*own;
    }
    std::vector<double> sums(observables.size(), 0.0);
    for (int first = 0; first < plan.shots; first += kShotBatch) {
        const int count = std::min(kShotBatch, plan.shots - first);
        std::vector<Rng> rngs;
        for (int k = first; k < first + count; ++k) rngs.push_back(make_stream(seed, {static_cast<std::uint64_t>(k)}));
        const std::vector<FockVector> evolved = evolve_with_insertions_batch(
            initial, evolver.basis(), *step, plan.insertions, plan.pass.twirl, std::span<Rng>(rngs));
        for (int k = 0; k < count; ++k) {
            if (options.mode == AcquisitionMode::exact) {
                for (std::size_t i = 0; i < observables.size(); ++i)
                    sums[i] += projector_expectation(evolved[k], observables[i]);
            } else {
                const auto result = projective_measure(evolved[k], observables, rngs[k], options.measure_mode);
                for (std::size_t i = 0; i < observables.size(); ++i) sums[i] += result.outcomes[i] ? 1.0 : 0.0;
            }
            if (counters) counters->add_run(plan.time, plan.insertions, plan.pass.twirl.size());
        }
    }
    std::vector<double> out(sums.size());
    for (std::size_t i = 0; i < sums.size(); ++i) out[i] = 2.0 * sums[i] / plan.shots - 1.0;
    return out;
}

inline std::vector<double> acquire_signal(const ExperimentPlan& plan, const HubbardModel& model, std::uint64_t seed,
                                          const AcquisitionOptions& options = {}) {
    return acquire_signal(plan, Evolver(model), seed, options);
}

struct LearnConfig {
    AcquisitionMode mode = AcquisitionMode::shot;
    MeasureMode measure_mode = MeasureMode::faithful;
    double calibration_constant = kDefaultCalibration;
    EvolutionConfig evolution{};
};

struct TargetEstimate {
    TargetKind kind;
    Edge edge{0, 0};  ///< hopping targets
    int site = -1;    ///< interaction targets
    int color = 0;
    double estimate = 0.0;
    std::vector<SignalRecord> signals;
    int degenerate_levels = 0;  ///< levels with Z_j = 0 (argument taken as 0)
};

struct LearnReport {
    std::vector<double> hopping;      ///< aligned with graph.edges()
    std::vector<double> interaction;  ///< per site
    std::vector<TargetEstimate> targets;
    CostCounters counters;
    RpeSchedule schedule;
    std::uint64_t seed = 0;
    int num_colors = 0;
    int passes = 0;
};

/// r = choose_r(2^j, budget, C) for each level.
inline std::vector<int> level_insertions(const RpeSchedule& schedule, double calibration_constant) {
    std::vector<int> r;
    for (int j = 0; j <= schedule.levels; ++j) r.push_back(choose_r(std::ldexp(1.0, j), kReshapeBudget, calibration_constant));
    return r;
}

/// Counters implied by the loop structure alone.
inline CostCounters expected_counters(const std::vector<PassPlan>& passes, const RpeSchedule& schedule,
                                      double calibration_constant) {
    const auto r = level_insertions(schedule, calibration_constant);
    std::int64_t sum_r = 0;
    for (int v : r) sum_r += v;
    CostCounters c;
    const auto P = static_cast<std::int64_t>(passes.size());
    c.total_evolution_time = static_cast<double>(P) * schedule.total_evolution_time();
    c.experiments = P * (schedule.levels + 1) * schedule.shots;
    for (const auto& p : passes)
        c.insertions += static_cast<std::int64_t>(p.twirl.size()) * schedule.shots_per_quadrature() * 2 * sum_r;
    return c;
}

/// Learns every h_ij and xi_i of `model`, which is only used as the black box
/// generating e^{-iHt}.
inline LearnReport learn(const HubbardModel& model, double epsilon, double eta, const LearnConfig& config,
                         std::uint64_t seed) {
    require_valid(model);
    const int n = model.n_sites();
    const Evolver evolver(model, config.evolution);
    const ColorPartition partition = greedy_color(model.graph);
    const std::vector<PassPlan> passes = plan_passes(model.graph, partition);
    const RpeSchedule schedule = rpe_schedule(epsilon, eta);
    const std::vector<int> r = level_insertions(schedule, config.calibration_constant);
    const AcquisitionOptions options{config.mode, config.measure_mode};

    LearnReport report;
    report.schedule = schedule;
    report.seed = seed;
    report.num_colors = partition.num_colors;
    report.passes = static_cast<int>(passes.size());
    report.hopping.assign(model.graph.edges().size(), 0.0);
    report.interaction.assign(n, 0.0);

    for (std::size_t p = 0; p < passes.size(); ++p) {
        const PassPlan& pass = passes[p];
        const std::size_t first = report.targets.size();
        for (std::size_t i = 0; i < pass.target_count(); ++i) {
            TargetEstimate t{pass.kind};
            t.color = pass.color;
            if (pass.kind == TargetKind::hopping) t.edge = pass.edges[i];
            else t.site = pass.sites[i];
            report.targets.push_back(std::move(t));
        }
        std::vector<int> sectors = evolver.basis().active(pass_initial_state(pass, Quadrature::cos_type, n));
        for (int s : evolver.basis().active(pass_initial_state(pass, Quadrature::sin_type, n)))
            if (std::find(sectors.begin(), sectors.end(), s) == sectors.end()) sectors.push_back(s);
        std::sort(sectors.begin(), sectors.end());
        for (int j = 0; j <= schedule.levels; ++j) {
            const double t = std::ldexp(1.0, j);
            const SectorPropagator step = evolver.propagator(t / r[j], sectors);
            std::vector<double> quad[2];
            for (int q = 0; q < 2; ++q) {
                ExperimentPlan plan{pass, j, q == 0 ? Quadrature::cos_type : Quadrature::sin_type, t,
                                    schedule.shots_per_quadrature(), r[j]};
                const std::uint64_t s = stream_seed(seed, {p, static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(q)});
                quad[q] = acquire_signal(plan, evolver, s, options, &report.counters, &step);
            }
            for (std::size_t i = 0; i < pass.target_count(); ++i)
                report.targets[first + i].signals.push_back(
                    {j, {quad[0][i], quad[1][i]}, schedule.shots_per_quadrature() * 2});
        }
        for (std::size_t i = first; i < report.targets.size(); ++i) {
            TargetEstimate& target = report.targets[i];
            RpeState state;
            for (const SignalRecord& rec : target.signals) {
                if (rec.z == std::complex<double>{}) {
                    ++target.degenerate_levels;
                    state = rpe_refine_angle(state, 0.0);
                } else {
                    state = rpe_refine(state, rec.z);
                }
            }
            const double phase = wrap_pi(state.theta);
            if (target.kind == TargetKind::hopping) {
                target.estimate = phase / 2.0;
                report.hopping[model.graph.index_of(target.edge)] = target.estimate;
            } else {
                target.estimate = phase;
                report.interaction[target.site] = target.estimate;
            }
        }
    }
    return report;
}

/// Composition of the error budget: per-quadrature reshaping bias b moves each of
/// X and Y by at most 2b, so |E Z - e^{i phi}| <= 4b; adding the Monte-Carlo
/// radius must stay within sqrt3/2.
struct BudgetCheck {
    bool ok;
    double composed;  ///< 4 b + shot radius
    double limit;     ///< sqrt3/2
};

inline BudgetCheck budget_check(double reshaping_error_bound, double shot_bound) {
    const double limit = std::sqrt(3.0) / 2.0;
    const double composed = 4.0 * reshaping_error_bound + shot_bound;
    return {composed <= limit + 1e-12, composed, limit};
}

}  // namespace fhlearn
