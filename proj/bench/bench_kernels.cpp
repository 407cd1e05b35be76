// Times every OpenMP kernel against its serial reference and checks that
// both paths agree bit for bit.
//
//   bench_kernels [repeats]

#include "ledmaint/calibration.hpp"
#include "ledmaint/optimizer.hpp"
#include "ledmaint/surrogate.hpp"

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>

using namespace ledmaint;

namespace {

template <class F>
double best_seconds(int repeats, F&& f) {
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}

void report(const char* name, double serial, double parallel, bool identical) {
    std::printf("%-22s serial %9.4f s  parallel %9.4f s  speedup %5.2fx  %s\n", name, serial, parallel,
                serial / parallel, identical ? "identical" : "MISMATCH");
}

} // namespace

int main(int argc, char** argv) {
    const int repeats = argc > 1 ? std::atoi(argv[1]) : 3;
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());

    const Layout layout = case_study_layout();
    const Eigen::MatrixXd states = sobol_states(2016, layout.J(), 7);
    {
        Eigen::MatrixXd a, b;
        const double ts = best_seconds(repeats, [&] { a = analytic_oracle_batch(layout, states, Execution::serial); });
        const double tp = best_seconds(repeats, [&] { b = analytic_oracle_batch(layout, states, Execution::parallel); });
        report("analytic_oracle_batch", ts, tp, a == b);
    }

    const Theta truth{2.2393, 0.8841, 3.7446, 0.0815};
    const std::vector<double> temps{328.15, 358.15, 378.15};
    const AdtDataset data = synth_lm80(truth, temps, 25, 1000.0, 10000.0, 3);
    PosteriorSamples post;
    {
        McmcOptions mo;
        mo.seed = 5;
        PosteriorSamples a, b;
        mo.execution = Execution::serial;
        const double ts = best_seconds(repeats, [&] { a = run_mcmc(data, PriorSpec{}, mo); });
        mo.execution = Execution::parallel;
        const double tp = best_seconds(repeats, [&] { b = run_mcmc(data, PriorSpec{}, mo); });
        report("run_mcmc", ts, tp, a.chains == b.chains);
        post = a;
    }
    {
        std::vector<double> times;
        for (int i = 0; i <= 40; ++i) times.push_back(0.25 * i);
        PredictiveBand a, b;
        const double ts = best_seconds(repeats, [&] { a = posterior_predictive(post, 358.15, times, 9, 0, Execution::serial); });
        const double tp = best_seconds(repeats, [&] { b = posterior_predictive(post, 358.15, times, 9, 0, Execution::parallel); });
        report("posterior_predictive", ts, tp, a.mean == b.mean && a.lower == b.lower && a.upper == b.upper);
    }
    {
        ModelBundle bundle;
        const auto specs = two_stage_draws(post, 20, 10, 318.15, 11);
        for (std::size_t l = 0; l < 20; ++l) bundle.fleet.thetas.push_back(specs[l * 10].theta);
        const Eigen::MatrixXd illum = analytic_oracle_batch(layout, states);
        bundle.surrogate = fit_surrogate(states, illum);
        bundle.simulation.t_over = 7300.0;
        EvaluationOptions eo;
        eo.runs = 100;
        eo.master_seed = 13;
        const Policy policy{2920.0, 0.4};
        ObjectiveEstimate a, b;
        eo.execution = Execution::serial;
        const double ts = best_seconds(repeats, [&] { a = evaluate_policy(policy, bundle, eo); });
        eo.execution = Execution::parallel;
        const double tp = best_seconds(repeats, [&] { b = evaluate_policy(policy, bundle, eo); });
        report("evaluate_policy", ts, tp, a.samples == b.samples);
    }
    return 0;
}
