#include "mes/sweep.hpp"

#include <omp.h>

#include "mes/errors.hpp"

namespace mes {

EpisodeOutcome run_job(const EpisodeJob& job) {
    EpisodeOutcome out;
    try {
        const LyapunovData lyap = make_lyapunov_data(job.gains);
        out.record = run_episode(job.config, job.gains, lyap, 1);
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    return out;
}

std::vector<EpisodeOutcome> run_episodes_serial(std::span<const EpisodeJob> jobs) {
    std::vector<EpisodeOutcome> out(jobs.size());
    for (std::size_t j = 0; j < jobs.size(); ++j)
        out[j] = run_job(jobs[j]);
    return out;
}

std::vector<EpisodeOutcome> run_episodes_parallel(std::span<const EpisodeJob> jobs, int threads) {
    std::vector<EpisodeOutcome> out(jobs.size());
    const auto n = static_cast<std::int64_t>(jobs.size());
    if (threads <= 0)
        threads = omp_get_max_threads();
    // Episodes differ wildly in cost when some diverge early.
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (std::int64_t j = 0; j < n; ++j)
        out[static_cast<std::size_t>(j)] = run_job(jobs[static_cast<std::size_t>(j)]);
    return out;
}

std::vector<EpisodeJob> gain_grid(const CampaignConfig& base, std::span<const double> k1,
                                  std::span<const double> k2, std::span<const double> k3) {
    std::vector<EpisodeJob> jobs;
    for (double a : k1)
        for (double b : k2)
            for (double c : k3) {
                GainSet g{a, b, c, base.nominal_gains.k_robust};
                if (is_hurwitz(g))
                    jobs.push_back({base, g});
            }
    return jobs;
}

} // namespace mes
