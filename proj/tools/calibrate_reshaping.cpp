// Calibration sweep for the reshaping constant C in r = ceil(C t^2 / budget).
//
// Every protocol pass of every suite instance is run at t = 1, 2, 4 with
// r = ceil(t^2 / budget), for both signal types and every target. The channel
// deviation |E<O> - <O>_eff| comes from the exact twirled-channel oracle when
// the active subspace is small and from Monte-Carlo otherwise. The printed
// constant is twice the largest deviation * r / t^2.

#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fhlearn/generate.hpp"
#include "fhlearn/protocol.hpp"
#include "fhlearn/reshape.hpp"
#include "fhlearn/verify.hpp"

using namespace fhlearn;

namespace {

struct SuiteInstance {
    std::string name;
    HubbardModel model;
};

std::vector<SuiteInstance> calibration_suite(int seeds) {
    std::vector<SuiteInstance> out;
    for (int s = 1; s <= seeds; ++s) {
        for (int n = 2; n <= 6; ++n)
            out.push_back({"chain" + std::to_string(n) + "/seed" + std::to_string(s),
                           generate_instance({GraphKind::chain, n}, static_cast<std::uint64_t>(s))});
        GenerateParams ring{GraphKind::grid};
        ring.rows = 2;
        ring.cols = 2;
        out.push_back({"grid2x2/seed" + std::to_string(s), generate_instance(ring, static_cast<std::uint64_t>(s))});
        GenerateParams grid{GraphKind::grid};
        grid.rows = 2;
        grid.cols = 3;
        out.push_back({"grid2x3/seed" + std::to_string(s), generate_instance(grid, static_cast<std::uint64_t>(s))});
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reshaping-constant calibration sweep"};
    int seeds = 3;
    int samples = 4000;
    int exact_limit = 100;
    std::string csv_path;
    app.add_option("--seeds", seeds, "coefficient seeds per graph")->check(CLI::PositiveNumber);
    app.add_option("--samples", samples, "Monte-Carlo realizations for large subspaces")->check(CLI::PositiveNumber);
    app.add_option("--exact-limit", exact_limit, "largest active dimension handled by the exact oracle");
    app.add_option("--out", csv_path, "CSV with one row per measured configuration");
    CLI11_PARSE(app, argc, argv);

    std::FILE* csv = csv_path.empty() ? nullptr : std::fopen(csv_path.c_str(), "w");
    if (!csv_path.empty() && !csv) {
        std::fprintf(stderr, "cannot open %s\n", csv_path.c_str());
        return 1;
    }
    if (csv) std::fprintf(csv, "instance,pass,quadrature,target,t,r,method,deviation,standard_error,ratio\n");

    double worst = 0.0;
    std::string worst_where;
    for (const auto& inst : calibration_suite(seeds)) {
        const int n = inst.model.n_sites();
        const auto passes = plan_passes(inst.model.graph, greedy_color(inst.model.graph));
        const Evolver evolver(inst.model);
        for (std::size_t p = 0; p < passes.size(); ++p) {
            const PassPlan& pass = passes[p];
            const Evolver reshaped(effective_hamiltonian(inst.model, pass.twirl));
            const auto observables = pass_observables(pass, n);
            for (Quadrature q : {Quadrature::cos_type, Quadrature::sin_type}) {
                const FockVector initial = pass_initial_state(pass, q, n);
                std::size_t dim = 0;
                for (int s : evolver.basis().active(initial)) dim += evolver.basis().masks(s).size();
                const bool exact = dim <= static_cast<std::size_t>(exact_limit);
                for (double t : {1.0, 2.0, 4.0}) {
                    const int r = choose_r(t, kReshapeBudget, 1.0);
                    const FockVector ideal = reshaped.evolve(initial, t);
                    std::vector<double> dev(observables.size()), se(observables.size(), 0.0);
                    if (exact) {
                        for (std::size_t i = 0; i < observables.size(); ++i)
                            dev[i] = twirled_channel_expectation(inst.model, pass.twirl, initial, observables[i], t, r) -
                                     projector_expectation(ideal, observables[i]);
                    } else {
                        Rng rng = make_stream(0xca1b, {p, static_cast<std::uint64_t>(q), static_cast<std::uint64_t>(t)});
                        for (std::size_t i = 0; i < observables.size(); ++i) {
                            const auto est = channel_error_estimate(inst.model, pass.twirl, observables[i], initial, t,
                                                                    r, samples, rng);
                            dev[i] = est.mean - est.exact;
                            se[i] = est.standard_error;
                        }
                    }
                    for (std::size_t i = 0; i < observables.size(); ++i) {
                        const double ratio = std::abs(dev[i]) * r / (t * t);
                        const std::string target =
                            pass.kind == TargetKind::hopping
                                ? "h" + std::to_string(pass.edges[i].first) + "-" + std::to_string(pass.edges[i].second)
                                : "xi" + std::to_string(pass.sites[i]);
                        if (csv)
                            std::fprintf(csv, "%s,%zu,%s,%s,%g,%d,%s,%.6e,%.3e,%.6f\n", inst.name.c_str(), p,
                                         q == Quadrature::cos_type ? "cos" : "sin", target.c_str(), t, r,
                                         exact ? "exact" : "monte-carlo", dev[i], se[i], ratio);
                        if (ratio > worst) {
                            worst = ratio;
                            worst_where = inst.name + " pass " + std::to_string(p) + " " + target + " t=" +
                                          std::to_string(static_cast<int>(t));
                        }
                    }
                }
            }
        }
        std::printf("%-16s done (running max ratio %.4f)\n", inst.name.c_str(), worst);
        std::fflush(stdout);
    }
    if (csv) std::fclose(csv);
    std::printf("max deviation*r/t^2 = %.4f at %s\n", worst, worst_where.c_str());
    std::printf("calibration constant (2x) = %.4f\n", 2.0 * worst);
    return 0;
}
