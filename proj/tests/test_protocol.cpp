#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fhlearn/generate.hpp"
#include "fhlearn/protocol.hpp"
#include "fhlearn/verify.hpp"
#include "oracles.hpp"

using namespace fhlearn;

namespace {

ExperimentPlan plan_for(const PassPlan& pass, Quadrature q, double t, int shots, int r) {
    return ExperimentPlan{pass, 0, q, t, shots, r};
}

PassPlan single_target(const HubbardModel& m, TargetKind kind) {
    for (const PassPlan& p : plan_passes(m.graph, greedy_color(m.graph)))
        if (p.kind == kind) return p;
    throw std::logic_error("no pass of that kind");
}

}  // namespace

TEST(Plan, PassesCoverEveryTargetOnce) {
    Rng rng(51);
    for (int trial = 0; trial < 40; ++trial) {
        const InteractionGraph g = random_bounded_degree_graph(3 + static_cast<int>(uniform_index(rng, 8)), 3, rng, 0.7);
        const ColorPartition part = greedy_color(g);
        std::vector<int> edge_hits(g.edges().size(), 0), site_hits(g.n_sites(), 0);
        for (const PassPlan& p : plan_passes(g, part)) {
            if (p.color == part.num_colors) {
                for (int s : p.sites) {
                    EXPECT_EQ(g.degree(s), 0);
                    ++site_hits[s];
                }
                continue;
            }
            const ColorClass& cls = color_sets(part, p.color);
            if (p.kind == TargetKind::hopping) {
                EXPECT_EQ(p.twirl.twirled_sites, TwirlSpec::complement_of(g.n_sites(), cls.vertices).twirled_sites);
                for (const Edge& e : p.edges) ++edge_hits[g.index_of(e)];
            } else {
                const auto& group = p.endpoint == 1 ? cls.first_vertices : cls.second_vertices;
                EXPECT_EQ(p.twirl.twirled_sites, TwirlSpec::complement_of(g.n_sites(), group).twirled_sites);
                EXPECT_FALSE(p.sites.empty());
                for (int s : p.sites) ++site_hits[s];
            }
            for (const auto& o : pass_observables(p, g.n_sites())) EXPECT_EQ(o.support_mask() & p.twirl.mode_mask(), 0u);
        }
        for (int h : edge_hits) EXPECT_EQ(h, 1);
        for (int h : site_hits) EXPECT_EQ(h, 1);
    }
}

TEST(Plan, ValidationRejectsTwirledTargets) {
    const HubbardModel m{chain_graph(3), {0.1, 0.2}, {0.1, 0.2, 0.3}};
    PassPlan p = single_target(m, TargetKind::hopping);
    p.twirl = TwirlSpec{{0}};
    EXPECT_THROW(plan_for(p, Quadrature::cos_type, 1.0, 1, 1).validate(3), std::invalid_argument);
    p.twirl = TwirlSpec{{5}};
    EXPECT_THROW(plan_for(p, Quadrature::cos_type, 1.0, 1, 1).validate(3), std::out_of_range);
    EXPECT_THROW(plan_for(single_target(m, TargetKind::hopping), Quadrature::cos_type, 1.0, 0, 1).validate(3),
                 std::invalid_argument);
}

TEST(Signal, SingleSiteExactModeCosine) {
    const HubbardModel m{InteractionGraph(1, {}), {}, {1.0}};
    PassPlan p;
    p.kind = TargetKind::interaction;
    p.endpoint = 1;
    p.sites = {0};
    const auto x = acquire_signal(plan_for(p, Quadrature::cos_type, std::numbers::pi, 1, 1), m, 1, {AcquisitionMode::exact});
    EXPECT_NEAR(x[0], -1.0, 1e-12);
    const auto y = acquire_signal(plan_for(p, Quadrature::sin_type, 0.5, 1, 1), m, 1, {AcquisitionMode::exact});
    EXPECT_NEAR(y[0], std::sin(0.5), 1e-12);
}

TEST(Signal, TwoSiteHoppingOscillatesAtTwiceH) {
    const double h = 0.3;
    const HubbardModel m{InteractionGraph(2, {{0, 1}}), {h}, {0.0, 0.0}};
    const PassPlan p = single_target(m, TargetKind::hopping);
    for (double t : {1.0, 2.5}) {
        EXPECT_NEAR(acquire_signal(plan_for(p, Quadrature::cos_type, t, 1, 1), m, 1, {AcquisitionMode::exact})[0],
                    std::cos(2 * h * t), 1e-12);
        EXPECT_NEAR(acquire_signal(plan_for(p, Quadrature::sin_type, t, 1, 1), m, 1, {AcquisitionMode::exact})[0],
                    std::sin(2 * h * t), 1e-12);
    }
    // brute force: |<phi|e^{-iHt}|phi>|^2 = cos^2(h t)
    const FockVector phi = prepare_pair_phi(2, 0, 1, Variant::plain);
    const Eigen::VectorXcd out = oracle::propagator(oracle::hubbard(m), 1.0) * oracle::to_eigen(phi);
    EXPECT_NEAR(std::norm(oracle::to_eigen(phi).dot(out)), std::pow(std::cos(h), 2), 1e-12);
}

TEST(Signal, HoppingStateStaysInSingleParticleSector) {
    const HubbardModel m{InteractionGraph(2, {{0, 1}}), {0.7}, {0.9, -0.4}};
    const FockVector out = Evolver(m).evolve(prepare_pair_phi(2, 0, 1, Variant::tilde), 3.1);
    double leak = 0.0;
    for (Mask k = 0; k < out.dimension(); ++k)
        if (k != 0b0001 && k != 0b0100) leak += std::norm(out[k]);
    EXPECT_LT(leak, 1e-10);
}

TEST(Signal, ShotModeWithinHoeffdingOfExact) {
    const HubbardModel m = generate_instance({GraphKind::chain, 3}, 7);
    for (const PassPlan& p : plan_passes(m.graph, greedy_color(m.graph))) {
        const ExperimentPlan plan = plan_for(p, Quadrature::sin_type, 2.0, 4000, 40);
        const auto exact = acquire_signal(plan, m, 11, {AcquisitionMode::exact});
        for (MeasureMode mm : {MeasureMode::faithful, MeasureMode::fast_marginal}) {
            const auto shot = acquire_signal(plan, m, 11, {AcquisitionMode::shot, mm});
            // per-shot outcome variance <= 1/4 on the mean, doubled for the 2x-1 map
            for (std::size_t i = 0; i < shot.size(); ++i) EXPECT_LT(std::abs(shot[i] - exact[i]), 5.0 / std::sqrt(4000.0));
        }
    }
}

TEST(Signal, CountersRecordEveryRun) {
    const HubbardModel m = generate_instance({GraphKind::chain, 4}, 2);
    const PassPlan p = single_target(m, TargetKind::hopping);
    CostCounters c;
    acquire_signal(plan_for(p, Quadrature::cos_type, 4.0, 70, 9), Evolver(m), 3, {}, &c);
    EXPECT_EQ(c.experiments, 70);
    EXPECT_DOUBLE_EQ(c.total_evolution_time, 280.0);
    EXPECT_EQ(c.insertions, 70 * 9 * static_cast<std::int64_t>(p.twirl.size()));
}

TEST(Learn, IsolatedSitesAreLearned) {
    const HubbardModel m{InteractionGraph(4, {{1, 2}}), {0.4}, {0.6, -0.3, 0.2, -0.8}};
    LearnConfig cfg;
    cfg.mode = AcquisitionMode::exact;
    const LearnReport rep = learn(m, 0.1, 0.1, cfg, 1);
    for (int i = 0; i < 4; ++i) EXPECT_LT(std::abs(rep.interaction[i] - m.interaction[i]), 0.1) << i;
    EXPECT_LT(std::abs(rep.hopping[0] - 0.4), 0.1);
}

TEST(Learn, ZeroHamiltonianGivesZeros) {
    const HubbardModel m{chain_graph(3), {0.0, 0.0}, {0.0, 0.0, 0.0}};
    const LearnReport rep = learn(m, 0.1, 0.1, {}, 5);
    for (double h : rep.hopping) EXPECT_LT(std::abs(h), 0.1);
    for (double x : rep.interaction) EXPECT_LT(std::abs(x), 0.1);
}

TEST(Learn, ExactModeRecoversCoefficientsAndCountersMatchClosedForm) {
    for (std::uint64_t seed : {1, 2, 3}) {
        const HubbardModel m = generate_instance({GraphKind::chain, 4}, seed);
        LearnConfig cfg;
        cfg.mode = AcquisitionMode::exact;
        const LearnReport rep = learn(m, 0.05, 0.1, cfg, seed);
        for (std::size_t k = 0; k < m.hopping.size(); ++k) EXPECT_LT(std::abs(rep.hopping[k] - m.hopping[k]), 0.05);
        for (int i = 0; i < m.n_sites(); ++i) EXPECT_LT(std::abs(rep.interaction[i] - m.interaction[i]), 0.05);
        const auto passes = plan_passes(m.graph, greedy_color(m.graph));
        EXPECT_EQ(rep.counters, expected_counters(passes, rep.schedule, cfg.calibration_constant));
        EXPECT_EQ(rep.counters.experiments,
                  static_cast<std::int64_t>(passes.size()) * (rep.schedule.levels + 1) * rep.schedule.shots);
        EXPECT_DOUBLE_EQ(rep.counters.total_evolution_time,
                         static_cast<double>(passes.size()) * rep.schedule.shots * (std::ldexp(1.0, rep.schedule.levels + 1) - 1));
        for (const auto& t : rep.targets) {
            EXPECT_LE(std::abs(t.estimate), t.kind == TargetKind::hopping ? std::numbers::pi / 2 : std::numbers::pi);
            EXPECT_EQ(t.signals.size(), static_cast<std::size_t>(rep.schedule.levels + 1));
        }
    }
}

TEST(Learn, ShotModeSmallChainIsDeterministicPerSeed) {
    const HubbardModel m = generate_instance({GraphKind::chain, 3}, 4);
    const LearnReport a = learn(m, 0.2, 0.1, {}, 9), b = learn(m, 0.2, 0.1, {}, 9);
    EXPECT_EQ(a.hopping, b.hopping);
    EXPECT_EQ(a.interaction, b.interaction);
    EXPECT_EQ(a.counters, b.counters);
    for (std::size_t k = 0; k < m.hopping.size(); ++k) EXPECT_LT(std::abs(a.hopping[k] - m.hopping[k]), 0.2);
    for (int i = 0; i < 3; ++i) EXPECT_LT(std::abs(a.interaction[i] - m.interaction[i]), 0.2);
}

TEST(Budget, Composition) {
    EXPECT_TRUE(budget_check(kReshapeBudget, 2.0 / 3.0).ok);
    EXPECT_NEAR(budget_check(kReshapeBudget, 2.0 / 3.0).composed, std::sqrt(3.0) / 2.0, 1e-15);
    EXPECT_FALSE(budget_check(0.2, 2.0 / 3.0).ok);
    EXPECT_TRUE(budget_check(0.0, 0.0).ok);
}
