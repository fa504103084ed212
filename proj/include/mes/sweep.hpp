#pragma once

// Batches of independent episodes (gain grids, randomized robustness runs).
// Learning campaigns are sequential by nature; only unrelated episodes are
// spread across threads here. The serial path is the reference the parallel
// one is tested against.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mes/harness.hpp"

namespace mes {

struct EpisodeJob {
    CampaignConfig config;
    GainSet gains;
};

struct EpisodeOutcome {
    std::optional<IterationRecord> record;
    std::string error; // set when the episode diverged or the gains were rejected
};

EpisodeOutcome run_job(const EpisodeJob& job);

std::vector<EpisodeOutcome> run_episodes_serial(std::span<const EpisodeJob> jobs);

// threads <= 0 uses the OpenMP default.
std::vector<EpisodeOutcome> run_episodes_parallel(std::span<const EpisodeJob> jobs,
                                                  int threads = 0);

// Cartesian grid over (K1, K2, K3) around `base`, k_robust fixed at the
// nominal value. Non-Hurwitz points are skipped.
std::vector<EpisodeJob> gain_grid(const CampaignConfig& base, std::span<const double> k1,
                                  std::span<const double> k2, std::span<const double> k3);

} // namespace mes
