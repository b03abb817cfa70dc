#include <gtest/gtest.h>

#include <cmath>

#include "fhlearn/generate.hpp"
#include "fhlearn/reshape.hpp"
#include "fhlearn/verify.hpp"
#include "oracles.hpp"

using namespace fhlearn;

TEST(Twirl, PhasesOnSimpleMasks) {
    const SampledTwirl none{{}, {}};
    EXPECT_EQ(none.phase(0b1011), Complex(1.0, 0.0));
    const SampledTwirl one{{1}, {0.4}};
    EXPECT_NEAR(std::abs(one.phase(0b1100) - std::polar(1.0, -0.8)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(one.phase(0b0100) - std::polar(1.0, -0.4)), 0.0, 1e-15);
    EXPECT_EQ(one.phase(0), Complex(1.0, 0.0));
}

TEST(Twirl, InverseRestoresAndCommutesWithInteraction) {
    Rng rng(31);
    FockVector s(2);
    for (Mask k = 0; k < s.dimension(); ++k) s[k] = Complex(uniform01(rng), uniform01(rng));
    const SampledTwirl u = sample_twirl(TwirlSpec{{0}}, rng);
    EXPECT_LT(apply_twirl(apply_twirl(s, u, false), u, true).max_abs_difference(s), 1e-15);

    const HubbardModel onsite{InteractionGraph(2, {{0, 1}}), {0.0}, {0.7, -0.2}};
    const Evolver ev(onsite);
    EXPECT_LT(ev.evolve(apply_twirl(s, u, false), 1.3).max_abs_difference(apply_twirl(ev.evolve(s, 1.3), u, false)), 1e-13);
}

TEST(Twirl, HoppingTermPicksUpPhase) {
    // U^dag c+_{0 up} c_{1 up} U with only site 0 twirled
    const double theta = 0.9;
    const int modes = 4;
    Eigen::MatrixXcd U = Eigen::MatrixXcd::Zero(16, 16);
    const SampledTwirl u{{0}, {theta}};
    for (Mask k = 0; k < 16; ++k) U(k, k) = u.phase(k);
    const Eigen::MatrixXcd hop = (oracle::creation(modes, 0) * oracle::annihilation(modes, 2)).cast<Complex>();
    EXPECT_LT((U.adjoint() * hop * U - std::polar(1.0, theta) * hop).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(EffectiveHamiltonian, TwoSiteTwirlLeavesOnlyInteractions) {
    const HubbardModel m{InteractionGraph(2, {{0, 1}}), {0.8}, {0.3, -0.6}};
    const HubbardModel eff = effective_hamiltonian(m, TwirlSpec{{0}});
    EXPECT_EQ(eff.hopping, std::vector<double>{0.0});
    EXPECT_EQ(eff.interaction, m.interaction);
    EXPECT_EQ(effective_hamiltonian(m, TwirlSpec{}).hopping, m.hopping);
}

TEST(EffectiveHamiltonian, FiveChainDecouplesAndMatchesQuadrature) {
    Rng rng(32);
    const HubbardModel m = random_coefficients(chain_graph(5), rng);
    const TwirlSpec spec{{2, 4}};
    const HubbardModel eff = effective_hamiltonian(m, spec);
    EXPECT_EQ(eff.hopping, (std::vector<double>{m.hopping[0], 0.0, 0.0, 0.0}));
    const Eigen::MatrixXcd quad = quadrature_effective_hamiltonian(m, spec, 8);
    EXPECT_LT((quad - oracle::hubbard(eff).cast<Complex>()).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(EffectiveHamiltonian, SingleSiteFineQuadrature) {
    Rng rng(33);
    const HubbardModel m = random_coefficients(chain_graph(3), rng);
    const Eigen::MatrixXcd quad = quadrature_effective_hamiltonian(m, TwirlSpec{{1}}, 64);
    EXPECT_LT((quad - oracle::hubbard(effective_hamiltonian(m, TwirlSpec{{1}})).cast<Complex>()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(ChooseR, FormulaAndBudget) {
    EXPECT_NEAR(kReshapeBudget, 0.04983968, 1e-8);
    EXPECT_EQ(choose_r(1.0, 0.05, 1.0), 20);
    EXPECT_EQ(choose_r(1e-3, 0.05, 1.0), 1);
    for (double t : {1.0, 2.0, 4.0, 8.0}) EXPECT_GE(choose_r(2 * t, kReshapeBudget), 4 * choose_r(t, kReshapeBudget) - 3);
    EXPECT_THROW(choose_r(0.0, 0.05), std::invalid_argument);
    EXPECT_THROW(choose_r(1.0, -1.0), std::invalid_argument);
    EXPECT_THROW(choose_r(1.0, 0.05, 0.0), std::invalid_argument);
}

TEST(ChannelError, RejectsObservableOnTwirledSites) {
    const HubbardModel m{chain_graph(3), {0.5, 0.5}, {0.1, 0.2, 0.3}};
    Rng rng(1);
    EXPECT_THROW(channel_error_estimate(m, TwirlSpec{{1}}, ProjectorSpec::pair_phi(3, 0, 1),
                                       prepare_pair_phi(3, 0, 1, Variant::plain), 1.0, 4, 10, rng),
                 std::invalid_argument);
}

TEST(ChannelError, EmptyTwirlHasNoDeviation) {
    Rng rng(34);
    const HubbardModel m = random_coefficients(chain_graph(3), rng);
    const auto est = channel_error_estimate(m, TwirlSpec{}, ProjectorSpec::pair_phi(3, 0, 1),
                                            prepare_pair_phi(3, 0, 1, Variant::plain), 2.0, 8, 16, rng);
    EXPECT_LT(est.deviation, 1e-12);
    EXPECT_LT(est.standard_error, 1e-12);
}

TEST(ChannelError, MonteCarloAgreesWithExactChannel) {
    Rng rng(35);
    const HubbardModel m{chain_graph(3), {0.9, -0.7}, {0.4, -0.2, 0.6}};
    const TwirlSpec spec{{2}};
    const FockVector init = prepare_pair_phi(3, 0, 1, Variant::plain);
    const ProjectorSpec O = ProjectorSpec::pair_phi(3, 0, 1);
    const auto est = channel_error_estimate(m, spec, O, init, 2.0, 6, 4000, rng);
    const double exact = twirled_channel_expectation(m, spec, init, O, 2.0, 6);
    EXPECT_LT(std::abs(est.mean - exact), 4 * est.standard_error + 1e-12);
}

TEST(ChannelError, VanishesForLargeR) {
    const HubbardModel m{chain_graph(3), {0.9, -0.7}, {0.4, -0.2, 0.6}};
    const TwirlSpec spec{{2}};
    const FockVector init = prepare_pair_phi(3, 0, 1, Variant::plain);
    const ProjectorSpec O = ProjectorSpec::pair_phi(3, 0, 1);
    const double exact = exact_signal(effective_hamiltonian(m, spec), init, O, 2.0);
    EXPECT_LT(std::abs(twirled_channel_expectation(m, spec, init, O, 2.0, 10000) - exact), 2e-3);
}

TEST(ChannelError, DeviationFallsAsOneOverR) {
    const HubbardModel m{chain_graph(3), {0.9, -0.7}, {0.4, -0.2, 0.6}};
    const TwirlSpec spec{{2}};
    const FockVector init = prepare_pair_phi(3, 0, 1, Variant::plain);
    const ProjectorSpec O = ProjectorSpec::pair_phi(3, 0, 1);
    const double ideal = exact_signal(effective_hamiltonian(m, spec), init, O, 2.0);
    std::vector<std::pair<double, double>> pts;
    for (int r : {8, 16, 32, 64, 128})
        pts.emplace_back(r, std::abs(twirled_channel_expectation(m, spec, init, O, 2.0, r) - ideal));
    EXPECT_NEAR(fit_loglog(pts).slope, -1.0, 0.15);
}

TEST(ChannelError, DefaultConstantKeepsFourChainWithinBudget) {
    Rng rng(36);
    const HubbardModel m = generate_instance({GraphKind::chain, 4}, 1);
    const TwirlSpec spec{{2, 3}};
    const FockVector init = prepare_pair_phi(4, 0, 1, Variant::tilde);
    const ProjectorSpec O = ProjectorSpec::pair_phi(4, 0, 1);
    const int r = choose_r(4.0, 0.05);
    const double ideal = exact_signal(effective_hamiltonian(m, spec), init, O, 4.0);
    EXPECT_LE(std::abs(twirled_channel_expectation(m, spec, init, O, 4.0, r) - ideal), 0.05);
}
