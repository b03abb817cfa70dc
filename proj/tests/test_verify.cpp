#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fhlearn/generate.hpp"
#include "fhlearn/reshape.hpp"
#include "fhlearn/verify.hpp"
#include "oracles.hpp"

using namespace fhlearn;

TEST(FitLogLog, RecoversPowerLaw) {
    std::vector<std::pair<double, double>> pts;
    for (double x : {1.0, 2.0, 4.0, 8.0}) pts.emplace_back(x, 3.0 * std::pow(x, -1.5));
    const FitResult f = fit_loglog(pts);
    EXPECT_NEAR(f.slope, -1.5, 1e-12);
    EXPECT_NEAR(f.intercept, std::log(3.0), 1e-12);
    EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
}

TEST(FitLogLog, RejectsDegenerateInput) {
    EXPECT_THROW(fit_loglog({{1, 1}, {2, 2}}), std::invalid_argument);
    EXPECT_THROW(fit_loglog({{1, 1}, {2, 0}, {3, 1}}), std::invalid_argument);
    EXPECT_THROW(fit_loglog({{2, 1}, {2, 2}, {2, 3}}), std::invalid_argument);
}

TEST(Quadrature, GuardsGridAndSize) {
    const HubbardModel m = generate_instance({GraphKind::chain, 4}, 1);
    EXPECT_THROW(quadrature_effective_hamiltonian(m, TwirlSpec{{0}}, 4), std::invalid_argument);
    EXPECT_THROW(quadrature_effective_hamiltonian(m, TwirlSpec{{0, 1, 2, 3}}, 8), std::invalid_argument);
}

TEST(Quadrature, EmptyTwirlIsTheHamiltonian) {
    const HubbardModel m = generate_instance({GraphKind::chain, 3}, 2);
    EXPECT_LT((quadrature_effective_hamiltonian(m, TwirlSpec{}, 5) - oracle::hubbard(m).cast<Complex>()).cwiseAbs().maxCoeff(),
              1e-15);
}

TEST(ExactSignal, SingleSiteClosedForm) {
    const HubbardModel m{InteractionGraph(1, {}), {}, {-0.37}};
    for (double t : {0.3, 1.7, 9.0}) {
        EXPECT_NEAR(exact_signal(m, prepare_site_psi(1, 0, Variant::plain), ProjectorSpec::site_psi(1, 0), t),
                    (1 + std::cos(-0.37 * t)) / 2, 1e-12);
        EXPECT_NEAR(exact_signal(m, prepare_site_psi(1, 0, Variant::tilde), ProjectorSpec::site_psi(1, 0), t),
                    (1 + std::sin(-0.37 * t)) / 2, 1e-12);
    }
}

namespace {

// Average of <O> over a K-point angle grid per twirled site per segment, dense matrices only.
double grid_channel(const HubbardModel& m, int twirled, const FockVector& init, const ProjectorSpec& O, double t, int r,
                    int K) {
    const int n = m.n_sites();
    const Eigen::MatrixXcd step = oracle::propagator(oracle::hubbard(m), t / r);
    const Eigen::MatrixXcd P = oracle::projector(O, n);
    const auto dim = step.rows();
    std::size_t points = 1;
    for (int l = 0; l < r; ++l) points *= K;
    double sum = 0.0;
    for (std::size_t g = 0; g < points; ++g) {
        Eigen::VectorXcd x = oracle::to_eigen(init);
        std::size_t rem = g;
        for (int l = 0; l < r; ++l) {
            const SampledTwirl u{{twirled}, {2.0 * std::numbers::pi * static_cast<double>(rem % K) / K}};
            rem /= K;
            for (Eigen::Index k = 0; k < dim; ++k) x[k] *= u.phase(static_cast<Mask>(k));
            x = step * x;
            for (Eigen::Index k = 0; k < dim; ++k) x[k] *= std::conj(u.phase(static_cast<Mask>(k)));
        }
        sum += x.dot(P * x).real();
    }
    return sum / static_cast<double>(points);
}

}  // namespace

TEST(TwirledChannel, MatchesAngleGridAverage) {
    const HubbardModel m{chain_graph(3), {0.9, -0.6}, {0.4, 0.7, -0.5}};
    const FockVector init = prepare_pair_phi(3, 0, 1, Variant::tilde);
    const ProjectorSpec O = ProjectorSpec::pair_phi(3, 0, 1);
    for (int r : {1, 2, 3}) {
        const double dense = grid_channel(m, 2, init, O, 1.4, r, 9);
        EXPECT_NEAR(twirled_channel_expectation(m, TwirlSpec{{2}}, init, O, 1.4, r), dense, 1e-12) << r;
    }
}

TEST(TwirledChannel, EmptyTwirlIsExactEvolution) {
    const HubbardModel m = generate_instance({GraphKind::chain, 3}, 5);
    const FockVector init = prepare_site_psi(3, 1, Variant::plain);
    const ProjectorSpec O = ProjectorSpec::site_psi(3, 1);
    EXPECT_NEAR(twirled_channel_expectation(m, TwirlSpec{}, init, O, 2.2, 7), exact_signal(m, init, O, 2.2), 1e-12);
    EXPECT_THROW(twirled_channel_expectation(m, TwirlSpec{}, init, O, 2.2, 0), std::invalid_argument);
}
