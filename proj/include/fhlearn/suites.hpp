#pragma once

// Invariant suites behind `fhlearn verify`: signals, reshaping, coloring, rpe.
// Each property records what was measured; a suite passes when all do.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "fhlearn/coloring.hpp"
#include "fhlearn/generate.hpp"
#include "fhlearn/protocol.hpp"
#include "fhlearn/reshape.hpp"
#include "fhlearn/rpe.hpp"
#include "fhlearn/verify.hpp"

namespace fhlearn {

struct PropertyResult {
    std::string name;
    bool passed;
    std::string measured;
};

struct SuiteResult {
    std::string suite;
    std::vector<PropertyResult> properties;

    [[nodiscard]] bool passed() const {
        for (const auto& p : properties)
            if (!p.passed) return false;
        return true;
    }
};

namespace detail {

inline std::string fmt(double x) {
    std::ostringstream os;
    os.precision(4);
    os << x;
    return os.str();
}

inline HubbardModel single_site(double xi) { return {InteractionGraph(1, {}), {}, {xi}}; }
inline HubbardModel two_site(double h) { return {InteractionGraph(2, {{0, 1}}), {h}, {0.0, 0.0}}; }

/// Distance-2 validity of one color class, by brute force over all edge pairs.
inline bool class_is_valid(const InteractionGraph& g, const std::vector<Edge>& edges) {
    for (std::size_t a = 0; a < edges.size(); ++a)
        for (std::size_t b = a + 1; b < edges.size(); ++b) {
            if (edges[a].shares_vertex(edges[b])) return false;
            for (const Edge& mid : g.edges())
                if (mid.shares_vertex(edges[a]) && mid.shares_vertex(edges[b])) return false;
        }
    return true;
}

}  // namespace detail

inline SuiteResult signals_suite(std::uint64_t seed) {
    SuiteResult out{"signals", {}};
    Rng rng = make_stream(seed, {1});
    double worst_site = 0.0, worst_pair = 0.0;
    for (int k = 0; k < 50; ++k) {
        const double xi = 2.0 * uniform01(rng) - 1.0, t = 10.0 * uniform01(rng);
        const auto m = detail::single_site(xi);
        const auto O = ProjectorSpec::site_psi(1, 0);
        worst_site = std::max({worst_site,
                               std::abs(exact_signal(m, prepare_site_psi(1, 0, Variant::plain), O, t) -
                                        (1 + std::cos(t * xi)) / 2),
                               std::abs(exact_signal(m, prepare_site_psi(1, 0, Variant::tilde), O, t) -
                                        (1 + std::sin(t * xi)) / 2)});
        const double h = 2.0 * uniform01(rng) - 1.0, s = 10.0 * uniform01(rng);
        const auto p = detail::two_site(h);
        const auto O2 = ProjectorSpec::pair_phi(2, 0, 1);
        worst_pair = std::max({worst_pair,
                               std::abs(exact_signal(p, prepare_pair_phi(2, 0, 1, Variant::plain), O2, s) -
                                        (1 + std::cos(2 * h * s)) / 2),
                               std::abs(exact_signal(p, prepare_pair_phi(2, 0, 1, Variant::tilde), O2, s) -
                                        (1 + std::sin(2 * h * s)) / 2)});
    }
    out.properties.push_back({"single-site cos/sin identities (50 draws)", worst_site < 1e-10,
                              "max deviation " + detail::fmt(worst_site)});
    out.properties.push_back({"two-site hopping identities (50 draws)", worst_pair < 1e-10,
                              "max deviation " + detail::fmt(worst_pair)});

    // sector confinement of |phi> under the two-site reshaped dynamics
    const auto p = detail::two_site(0.7);
    const FockVector evolved = Evolver(p).evolve(prepare_pair_phi(2, 0, 1, Variant::tilde), 3.1);
    const Mask up0 = mode_index(0, Spin::up, 2).bit(), up1 = mode_index(1, Spin::up, 2).bit();
    double outside = 0.0;
    for (Mask m = 0; m < evolved.dimension(); ++m)
        if (m != up0 && m != up1) outside += std::norm(evolved[m]);
    const double leak = std::sqrt(outside);
    out.properties.push_back({"hopping state stays in span{up_k1, up_k2}", leak < 1e-10, "leak " + detail::fmt(leak)});

    // interaction identities with a twirled environment in vacuum (4-site chain)
    const HubbardModel chain = generate_instance({GraphKind::chain, 4}, seed);
    double worst_env = 0.0;
    for (const auto& pass : plan_passes(chain.graph, greedy_color(chain.graph))) {
        if (pass.kind != TargetKind::interaction) continue;
        const Evolver reshaped(effective_hamiltonian(chain, pass.twirl));
        const auto obs = pass_observables(pass, 4);
        for (double t : {0.7, 2.0, 5.3}) {
            const auto c = reshaped.evolve(pass_initial_state(pass, Quadrature::cos_type, 4), t);
            const auto s = reshaped.evolve(pass_initial_state(pass, Quadrature::sin_type, 4), t);
            for (std::size_t i = 0; i < obs.size(); ++i) {
                const double xi = chain.interaction[pass.sites[i]];
                worst_env = std::max({worst_env, std::abs(projector_expectation(c, obs[i]) - (1 + std::cos(t * xi)) / 2),
                                      std::abs(projector_expectation(s, obs[i]) - (1 + std::sin(t * xi)) / 2)});
            }
        }
    }
    out.properties.push_back({"interaction identities under reshaped chain dynamics", worst_env < 1e-10,
                              "max deviation " + detail::fmt(worst_env)});
    return out;
}

inline SuiteResult reshaping_suite(std::uint64_t seed) {
    SuiteResult out{"reshaping", {}};
    Rng rng = make_stream(seed, {2});

    double worst = 0.0;
    for (int k = 0; k < 30; ++k) {
        const int n = 2 + static_cast<int>(uniform_index(rng, 3));
        const HubbardModel m = random_coefficients(random_bounded_degree_graph(n, 3, rng, 0.7), rng);
        std::vector<int> sites;
        for (int s = 0; s < n; ++s)
            if (uniform01(rng) < 0.5) sites.push_back(s);
        if (sites.size() > 3) sites.resize(3);
        const TwirlSpec spec{sites};
        const Eigen::MatrixXcd analytic = build_matrix(effective_hamiltonian(m, spec)).cast<Complex>().toDense();
        worst = std::max(worst, (analytic - quadrature_effective_hamiltonian(m, spec, 8)).cwiseAbs().maxCoeff());
    }
    out.properties.push_back({"effective Hamiltonian equals quadrature average (30 models)", worst < 1e-10,
                              "max entry deviation " + detail::fmt(worst)});

    // 1/r law at t = 2 on a 4-site chain, exact channel average
    const HubbardModel chain = {chain_graph(4), {0.5, 0.5, 0.5}, {0.2, 0.2, 0.2, 0.2}};
    const TwirlSpec spec = TwirlSpec::complement_of(4, {0, 1});
    const FockVector phi = prepare_pair_phi(4, 0, 1, Variant::plain);
    const ProjectorSpec O = ProjectorSpec::pair_phi(4, 0, 1);
    const double ideal = projector_expectation(Evolver(effective_hamiltonian(chain, spec)).evolve(phi, 2.0), O);
    std::vector<std::pair<double, double>> pts;
    for (int r : {8, 16, 32, 64, 128})
        pts.emplace_back(r, std::abs(twirled_channel_expectation(chain, spec, phi, O, 2.0, r) - ideal));
    const FitResult fit = fit_loglog(pts);
    out.properties.push_back({"channel deviation slope vs r in [-1.15, -0.85]", fit.slope >= -1.15 && fit.slope <= -0.85,
                              "slope " + detail::fmt(fit.slope)});

    // default constant keeps every 4-site-chain pass within its budget at t = 4
    const HubbardModel suite_chain = generate_instance({GraphKind::chain, 4}, seed);
    const int r = choose_r(4.0, kReshapeBudget);
    double dev = 0.0;
    for (const auto& pass : plan_passes(suite_chain.graph, greedy_color(suite_chain.graph))) {
        const Evolver reshaped(effective_hamiltonian(suite_chain, pass.twirl));
        const auto obs = pass_observables(pass, 4);
        for (Quadrature q : {Quadrature::cos_type, Quadrature::sin_type}) {
            const FockVector init = pass_initial_state(pass, q, 4);
            const FockVector ideal_state = reshaped.evolve(init, 4.0);
            for (const auto& o : obs)
                dev = std::max(dev, std::abs(twirled_channel_expectation(suite_chain, pass.twirl, init, o, 4.0, r) -
                                             projector_expectation(ideal_state, o)));
        }
    }
    out.properties.push_back({"default calibration keeps deviation below the budget (t = 4)", dev <= kReshapeBudget,
                              "max deviation " + detail::fmt(dev) + " at r = " + std::to_string(r) + ", budget " +
                                  detail::fmt(kReshapeBudget)});
    return out;
}

inline SuiteResult coloring_suite(std::uint64_t seed) {
    SuiteResult out{"coloring", {}};
    Rng rng = make_stream(seed, {3});
    int invalid = 0, over = 0, worst_chi = 0, worst_bound = 0;
    for (int k = 0; k < 200; ++k) {
        const int n = 2 + static_cast<int>(uniform_index(rng, 19));
        const int d = 1 + static_cast<int>(uniform_index(rng, 4));
        const InteractionGraph g = random_bounded_degree_graph(n, d, rng, 0.6);
        const ColorPartition p = greedy_color(g);
        for (const auto& cls : p.classes)
            if (!detail::class_is_valid(g, cls.edges)) ++invalid;
        const int D = g.max_degree();
        if (p.num_colors > 4 * D * D + 1) ++over;
        if (p.num_colors > worst_chi) {
            worst_chi = p.num_colors;
            worst_bound = 4 * D * D + 1;
        }
    }
    out.properties.push_back({"color classes are distance-2 independent (200 graphs)", invalid == 0,
                              std::to_string(invalid) + " invalid classes"});
    out.properties.push_back({"chi <= 4 d^2 + 1 (200 graphs)", over == 0,
                              "largest chi " + std::to_string(worst_chi) + " (bound " + std::to_string(worst_bound) + ")"});
    const int path_chi = greedy_color(chain_graph(4)).num_colors;
    out.properties.push_back({"3-edge path uses 3 colors", path_chi == 3, "chi " + std::to_string(path_chi)});
    return out;
}

inline SuiteResult rpe_suite(std::uint64_t seed) {
    SuiteResult out{"rpe", {}};
    Rng rng = make_stream(seed, {4});
    for (double eps : {1e-2, 1e-3}) {
        double worst = 0.0;
        for (int k = 0; k < 100; ++k) {
            const double phi = 2.0 * uniform01(rng) - 1.0;
            const double est = rpe_run([&](int j) { return std::polar(1.0, std::ldexp(phi, j)); }, eps, 0.1);
            worst = std::max(worst, std::abs(est - phi));
        }
        out.properties.push_back({"exact signals, eps = " + detail::fmt(eps), worst < eps, "max error " + detail::fmt(worst)});
    }

    int broken = 0;
    double worst = 0.0;
    const double eps = 1e-3;
    const RpeSchedule sched = rpe_schedule(eps, 0.1);
    for (int k = 0; k < 100; ++k) {
        const double phi = 2.0 * uniform01(rng) - 1.0;
        const double rot = kTwoPi * uniform01(rng);
        const auto trace = rpe_trace(
            [&](int j) { return std::polar(1.0, std::ldexp(phi, j)) + std::polar(0.6, rot + j); }, sched);
        for (const auto& s : trace)
            if (circular_distance(s.theta, phi) >= std::numbers::pi / (3.0 * std::ldexp(1.0, s.level))) ++broken;
        worst = std::max(worst, std::abs(wrap_pi(trace.back().theta) - phi));
    }
    out.properties.push_back({"noise 0.6 keeps the interval invariant", broken == 0,
                              std::to_string(broken) + " violations"});
    out.properties.push_back({"noise 0.6 final error < eps", worst < eps, "max error " + detail::fmt(worst)});

    const RpeSchedule shot = rpe_schedule(0.05, 0.1);
    int ok = 0;
    for (int k = 0; k < 200; ++k) {
        const double phi = 2.0 * uniform01(rng) - 1.0;
        auto mean = [&](double p) {
            int hits = 0;
            for (int s = 0; s < shot.shots_per_quadrature(); ++s) hits += uniform01(rng) < p;
            return 2.0 * hits / shot.shots_per_quadrature() - 1.0;
        };
        RpeState st;
        for (int j = 0; j <= shot.levels; ++j) {
            const double a = std::ldexp(phi, j);
            const std::complex<double> z{mean((1 + std::cos(a)) / 2), mean((1 + std::sin(a)) / 2)};
            st = z == std::complex<double>{} ? rpe_refine_angle(st, 0.0) : rpe_refine(st, z);
        }
        ok += std::abs(wrap_pi(st.theta) - phi) < 0.05;
    }
    out.properties.push_back({"shot-noise success rate >= 90% (200 trials)", ok >= 180,
                              std::to_string(ok) + "/200 within eps"});
    return out;
}

inline SuiteResult run_suite(const std::string& name, std::uint64_t seed) {
    if (name == "signals") return signals_suite(seed);
    if (name == "reshaping") return reshaping_suite(seed);
    if (name == "coloring") return coloring_suite(seed);
    if (name == "rpe") return rpe_suite(seed);
    throw std::invalid_argument("unknown suite '" + name + "' (signals, reshaping, coloring, rpe)");
}

}  // namespace fhlearn
