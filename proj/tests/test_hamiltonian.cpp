#include <gtest/gtest.h>

#include <algorithm>

#include "fhlearn/generate.hpp"
#include "fhlearn/hamiltonian.hpp"
#include "oracles.hpp"

using namespace fhlearn;

namespace {

bool has_kind(const std::vector<Violation>& v, const std::string& kind) {
    return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.kind == kind; });
}

Eigen::MatrixXd dense(const SparseOperator& H) { return Eigen::MatrixXd(H); }

}  // namespace

TEST(Graph, ValidatesStructure) {
    EXPECT_THROW(InteractionGraph(3, {{1, 1}}), std::invalid_argument);
    EXPECT_THROW(InteractionGraph(3, {{0, 3}}), std::out_of_range);
    EXPECT_THROW(InteractionGraph(3, {{0, 1}, {1, 0}}), std::invalid_argument);
    EXPECT_THROW(InteractionGraph(0, {}), std::invalid_argument);
    const InteractionGraph g(4, {{2, 1}, {0, 1}, {3, 1}});
    EXPECT_EQ(g.max_degree(), 3);
    EXPECT_EQ(g.degree(0), 1);
    EXPECT_EQ(g.edges().front(), (Edge{0, 1}));
    EXPECT_EQ(g.index_of({2, 1}), 1);
    EXPECT_FALSE(g.contains({0, 2}));
}

TEST(Model, ValidationReportsEachViolation) {
    const HubbardModel ok{chain_graph(3), {0.5, 0.5}, {0.3, 0.3, 0.3}};
    EXPECT_TRUE(validate_model(ok).empty());

    HubbardModel hop = ok;
    hop.hopping[0] = 1.5;
    EXPECT_TRUE(has_kind(validate_model(hop), "hopping bound"));
    EXPECT_THROW(require_valid(hop), std::invalid_argument);

    HubbardModel shape = ok;
    shape.interaction.pop_back();
    EXPECT_TRUE(has_kind(validate_model(shape), "shape"));

    HubbardModel xi = ok;
    xi.interaction[1] = -1.01;
    EXPECT_TRUE(has_kind(validate_model(xi), "interaction bound"));

    HubbardModel nan = ok;
    nan.hopping[1] = std::nan("");
    EXPECT_TRUE(has_kind(validate_model(nan), "non-finite"));
}

TEST(BuildMatrix, SingleSiteIsDiagonalInteraction) {
    const HubbardModel m{InteractionGraph(1, {}), {}, {0.37}};
    const Eigen::MatrixXd H = dense(build_matrix(m));
    Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(4, 4);
    expect(3, 3) = 0.37;
    EXPECT_EQ((H - expect).cwiseAbs().maxCoeff(), 0.0);
}

TEST(BuildMatrix, TwoSiteSpinUpSectorHasEigenvaluesPlusMinusH) {
    const double h = 0.42;
    const HubbardModel m{InteractionGraph(2, {{0, 1}}), {h}, {0.0, 0.0}};
    const Eigen::MatrixXd H = dense(build_matrix(m));
    Eigen::Matrix2d block;
    block << H(0b0001, 0b0001), H(0b0001, 0b0100), H(0b0100, 0b0001), H(0b0100, 0b0100);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(block);
    EXPECT_NEAR(es.eigenvalues()[0], -h, 1e-15);
    EXPECT_NEAR(es.eigenvalues()[1], h, 1e-15);
}

TEST(BuildMatrix, ZeroModelIsZero) {
    const HubbardModel m{chain_graph(3), {0.0, 0.0}, {0.0, 0.0, 0.0}};
    EXPECT_EQ(build_matrix(m).nonZeros() == 0 || dense(build_matrix(m)).cwiseAbs().maxCoeff() == 0.0, true);
}

TEST(BuildMatrix, MatchesJordanWignerAssembly) {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        Rng rng(seed);
        const int n = 2 + static_cast<int>(seed % 2);
        const HubbardModel m = random_coefficients(random_bounded_degree_graph(n, 2, rng, 0.9), rng);
        const Eigen::MatrixXd H = dense(build_matrix(m));
        EXPECT_LT((H - oracle::hubbard(m)).cwiseAbs().maxCoeff(), 1e-15) << seed;
        EXPECT_LE((H - H.transpose()).cwiseAbs().maxCoeff(), 1e-14);
    }
}

TEST(BuildMatrix, ConservesSpinResolvedNumber) {
    const HubbardModel m = generate_instance({GraphKind::grid, 4, 2, 2}, 3);
    const Eigen::MatrixXd H = dense(build_matrix(m));
    const int modes = 8;
    Eigen::MatrixXd Nup = Eigen::MatrixXd::Zero(256, 256), Ndn = Nup;
    for (int i = 0; i < 4; ++i) {
        Nup += oracle::creation(modes, 2 * i) * oracle::annihilation(modes, 2 * i);
        Ndn += oracle::creation(modes, 2 * i + 1) * oracle::annihilation(modes, 2 * i + 1);
    }
    EXPECT_LE((H * Nup - Nup * H).norm(), 1e-12);
    EXPECT_LE((H * Ndn - Ndn * H).norm(), 1e-12);
}

TEST(BuildMatrix, ZeroInteractionAnnihilatesVacuum) {
    const HubbardModel m{chain_graph(3), {0.3, -0.9}, {0.0, 0.0, 0.0}};
    const Eigen::MatrixXd H = dense(build_matrix(m));
    EXPECT_EQ(H.col(0).cwiseAbs().maxCoeff(), 0.0);
    // single-particle states stay single-particle
    for (int k = 0; k < 6; ++k)
        for (Eigen::Index r = 0; r < H.rows(); ++r)
            if (H(r, Eigen::Index{1} << k) != 0.0) EXPECT_EQ(std::popcount(static_cast<unsigned>(r)), 1);
}

TEST(Restrict, ChainEdgeKeepsItsCoefficients) {
    const HubbardModel m{chain_graph(3), {0.2, -0.7}, {0.1, 0.5, -0.3}};
    const RestrictedModel r = restrict_to_edge(m, {1, 2});
    EXPECT_EQ(r.site_map[0], 1);
    EXPECT_EQ(r.site_map[1], 2);
    EXPECT_EQ(r.model.hopping, std::vector<double>{-0.7});
    EXPECT_EQ(r.model.interaction, (std::vector<double>{0.5, -0.3}));
    EXPECT_THROW(restrict_to_edge(m, {0, 2}), std::invalid_argument);
}

TEST(Restrict, WholeTwoSiteModelIsUnchanged) {
    const HubbardModel m{InteractionGraph(2, {{0, 1}}), {0.0}, {0.4, -0.6}};
    const RestrictedModel r = restrict_to_edge(m, {0, 1});
    EXPECT_EQ((dense(build_matrix(r.model)) - dense(build_matrix(m))).cwiseAbs().maxCoeff(), 0.0);
}
