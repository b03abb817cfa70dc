// fhlearn: generate instances, learn them, sweep epsilon, run invariant suites.

#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fhlearn/generate.hpp"
#include "fhlearn/harness.hpp"
#include "fhlearn/io.hpp"
#include "fhlearn/suites.hpp"

using namespace fhlearn;

namespace {

void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") std::cout << text;
    else write_text_file(path, text);
}

struct RunFlags {
    std::string mode = "shot";
    std::string measure_mode = "faithful";

    void add(CLI::App* app, RunConfig& c) {
        app->add_option("--epsilon", c.epsilon, "target accuracy")->capture_default_str();
        app->add_option("--eta", c.eta, "failure probability")->capture_default_str();
        app->add_option("--seed", c.seed, "root seed")->capture_default_str();
        app->add_option("--mode", mode, "shot or exact")->check(CLI::IsMember({"shot", "exact"}))->capture_default_str();
        app->add_option("--measure-mode", measure_mode, "faithful or fast-marginal")
            ->check(CLI::IsMember({"faithful", "fast-marginal"}))
            ->capture_default_str();
        app->add_option("--calib-c", c.calibration_constant, "reshaping constant C in r = ceil(C t^2 / b)")
            ->capture_default_str();
        app->add_flag("--allow-large", c.allow_large, "lift the shot-mode site limit");
    }
    void apply(RunConfig& c) const {
        c.mode = parse_acquisition_mode(mode);
        c.measure_mode = parse_measure_mode(measure_mode);
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fermi-Hubbard Hamiltonian learning with phase-twirl reshaping"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "write a random instance");
    std::string kind = "chain", gen_out;
    GenerateParams gp;
    std::uint64_t gen_seed = 1;
    gen->add_option("kind", kind, "chain, grid or random")->check(CLI::IsMember({"chain", "grid", "random"}));
    gen->add_option("--sites", gp.n_sites, "sites (chain, random)")->check(CLI::PositiveNumber);
    gen->add_option("--rows", gp.rows, "grid rows")->check(CLI::PositiveNumber);
    gen->add_option("--cols", gp.cols, "grid columns")->check(CLI::PositiveNumber);
    gen->add_option("--max-degree", gp.max_degree, "degree bound (random)")->check(CLI::PositiveNumber);
    gen->add_option("--keep", gp.keep, "edge keep probability (random)");
    gen->add_option("--seed", gen_seed, "seed")->capture_default_str();
    gen->add_option("--out", gen_out, "output path (default stdout)");

    // learn
    auto* lrn = app.add_subcommand("learn", "learn every coefficient of an instance");
    std::string learn_in;
    RunConfig learn_cfg;
    RunFlags learn_flags;
    lrn->add_option("instance", learn_in, "instance file")->required()->check(CLI::ExistingFile);
    learn_flags.add(lrn, learn_cfg);
    lrn->add_option("--out", learn_cfg.out, "report path (default stdout)");

    // scaling
    auto* scl = app.add_subcommand("scaling", "sweep epsilon and fit cost exponents");
    std::string scaling_in;
    RunConfig scaling_cfg;
    RunFlags scaling_flags;
    std::vector<double> epsilons{0.2, 0.1, 0.05, 0.025};
    int trials = 1;
    scl->add_option("instance", scaling_in, "instance file")->required()->check(CLI::ExistingFile);
    scaling_flags.add(scl, scaling_cfg);
    scl->remove_option(scl->get_option("--epsilon"));
    scl->add_option("--epsilon", epsilons, "epsilon values (at least three)")->capture_default_str();
    scl->add_option("--trials", trials, "trials per epsilon")->check(CLI::PositiveNumber)->capture_default_str();
    scl->add_option("--out", scaling_cfg.out, "CSV path (default stdout)");

    // verify
    auto* ver = app.add_subcommand("verify", "run an invariant suite");
    std::string suite;
    std::uint64_t verify_seed = 1;
    ver->add_option("suite", suite, "signals, reshaping, coloring or rpe")
        ->required()
        ->check(CLI::IsMember({"signals", "reshaping", "coloring", "rpe"}));
    ver->add_option("--seed", verify_seed, "seed")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            gp.kind = kind == "chain" ? GraphKind::chain : kind == "grid" ? GraphKind::grid : GraphKind::random_bounded_degree;
            emit(gen_out, dump_document(instance_to_json(generate_instance(gp, gen_seed))));
        } else if (*lrn) {
            learn_flags.apply(learn_cfg);
            const RunReport rep = run_learn(read_instance(learn_in), learn_cfg);
            emit(learn_cfg.out, dump_document(report_to_json(rep)));
            std::fprintf(stderr, "max error %.6g, %s; evolution time %.17g, experiments %lld, insertions %lld\n",
                         rep.max_error(), rep.all_within_epsilon() ? "all targets within epsilon" : "some targets missed",
                         rep.learn.counters.total_evolution_time, static_cast<long long>(rep.learn.counters.experiments),
                         static_cast<long long>(rep.learn.counters.insertions));
        } else if (*scl) {
            scaling_flags.apply(scaling_cfg);
            const ScalingSweep sweep = run_scaling(read_instance(scaling_in), epsilons, trials, scaling_cfg);
            emit(scaling_cfg.out, scaling_csv(sweep));
            const ScalingFits fits = fit_scaling(sweep);
            std::fprintf(stderr, "fit vs 1/epsilon: time slope %.4f (R^2 %.4f), insertions slope %.4f (R^2 %.4f), "
                                 "experiments slope %.4f\n",
                         fits.time.slope, fits.time.r_squared, fits.insertions.slope, fits.insertions.r_squared,
                         fits.experiments.slope);
        } else if (*ver) {
            const SuiteResult res = run_suite(suite, verify_seed);
            for (const auto& p : res.properties)
                std::printf("%s  %s: %s\n", p.passed ? "PASS" : "FAIL", p.name.c_str(), p.measured.c_str());
            std::printf("suite %s: %s\n", res.suite.c_str(), res.passed() ? "pass" : "FAIL");
            return res.passed() ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
