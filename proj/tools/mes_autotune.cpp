// mes-autotune: validate configs, run a fixed-gain episode or a learning campaign.
//
// Exit codes: 0 ok, 1 unreadable or malformed config, 2 validation failure,
// 3 divergence (partial output kept).

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mes/config.hpp"
#include "mes/errors.hpp"
#include "mes/harness.hpp"
#include "mes/report.hpp"

namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kParse = 1, kInvalid = 2, kDiverged = 3 };

struct Loaded {
    std::optional<mes::RunConfig> config;
    int code = kOk;
};

Loaded load(const std::string& path) {
    Loaded out;
    try {
        out.config = mes::load_config_file(path);
    } catch (const mes::ConfigParseError& e) {
        std::cerr << path << ": " << e.what() << "\n";
        out.code = kParse;
        return out;
    } catch (const mes::ConfigSchemaError& e) {
        for (const auto& p : e.problems())
            std::cerr << path << ": " << p << "\n";
        out.code = kInvalid;
        return out;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        out.code = kParse;
        return out;
    }
    const auto diags = mes::validate(out.config->campaign);
    for (const auto& d : diags)
        std::cerr << path << ": " << d << "\n";
    if (!diags.empty())
        out.code = kInvalid;
    return out;
}

fs::path output_dir(const std::string& flag, const mes::RunConfig& cfg) {
    if (!flag.empty())
        return flag;
    if (const char* env = std::getenv("MES_AUTOTUNE_OUT"); env && *env)
        return env;
    return cfg.output_dir;
}

int cmd_validate(const std::string& path) {
    const Loaded l = load(path);
    if (l.code == kOk)
        std::cout << path << ": ok\n";
    return l.code;
}

int cmd_simulate(const std::string& path, const std::string& out_flag) {
    const Loaded l = load(path);
    if (l.code != kOk)
        return l.code;
    const mes::RunConfig& rc = *l.config;
    const mes::CampaignConfig& cfg = rc.campaign;
    const fs::path dir = output_dir(out_flag, rc);

    mes::Telemetry tel;
    std::optional<mes::IterationRecord> rec;
    std::optional<mes::CampaignFailure> failure;
    try {
        const auto lyap = mes::make_lyapunov_data(cfg.nominal_gains);
        rec = mes::run_episode(cfg, cfg.nominal_gains, lyap, 1, &tel);
    } catch (const mes::EpisodeDiverged& e) {
        failure = mes::CampaignFailure{e.iteration(), e.time(), e.what()};
    }
    mes::write_file_atomic(dir / "episode.csv", mes::episode_csv(tel, rc.stride));
    mes::write_file_atomic(dir / "summary.json",
                           mes::simulate_summary_json(rec ? &*rec : nullptr, cfg.nominal_gains,
                                                      failure));
    if (failure) {
        std::cerr << "episode diverged at t = " << failure->time << " s: " << failure->message
                  << "\n";
        return kDiverged;
    }
    std::cout << "Q = " << mes::format_number(rec->Q) << "\n"
              << "z(t_f) = (" << mes::format_number(rec->z_terminal.z1) << ", "
              << mes::format_number(rec->z_terminal.z2) << ", "
              << mes::format_number(rec->z_terminal.z3) << ")\n"
              << "wrote " << (dir / "episode.csv").string() << "\n";
    return kOk;
}

int cmd_learn(const std::string& path, std::optional<int> iterations, bool keep_episodes,
              const std::string& out_flag) {
    const Loaded l = load(path);
    if (l.code != kOk)
        return l.code;
    mes::RunConfig rc = *l.config;
    if (iterations) {
        if (*iterations < 1) {
            std::cerr << "--iterations must be at least 1\n";
            return kInvalid;
        }
        rc.campaign.iterations = *iterations;
    }
    const fs::path dir = output_dir(out_flag, rc);

    mes::EpisodeCallback cb;
    if (keep_episodes) {
        cb = [&](const mes::IterationRecord& r, const mes::Telemetry& tel) {
            char name[32];
            std::snprintf(name, sizeof name, "%03d.csv", r.index);
            mes::write_file_atomic(dir / "episodes" / name, mes::episode_csv(tel, rc.stride));
        };
    }
    const mes::CampaignResult res = mes::run_campaign(rc.campaign, cb);
    mes::write_file_atomic(dir / "campaign.csv", mes::campaign_csv(res.records));
    mes::write_file_atomic(dir / "summary.json",
                           mes::learn_summary_json(res, rc.campaign.iterations));
    if (res.failure) {
        std::cerr << "iteration " << res.failure->iteration << " diverged at t = "
                  << res.failure->time << " s: " << res.failure->message << "\n";
        return kDiverged;
    }
    const auto& last = res.records.back();
    std::cout << "Q(1) = " << mes::format_number(res.q_first) << ", Q(" << last.index
              << ") = " << mes::format_number(last.Q) << "\n"
              << "wrote " << (dir / "campaign.csv").string() << "\n";
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Extremum-seeking gain tuning for a robust feedback-linearizing controller"};
    app.require_subcommand(1);

    std::string cfg_path, out_dir;
    bool no_learning = false, keep = false;
    std::optional<int> iterations;

    auto* v = app.add_subcommand("validate", "check a config file");
    v->add_option("config", cfg_path, "JSON config")->required();

    auto* s = app.add_subcommand("simulate", "one episode with the nominal gains");
    s->add_option("config", cfg_path, "JSON config")->required();
    s->add_flag("--no-learning", no_learning, "fixed nominal gains (default for simulate)");
    s->add_option("--out", out_dir, "output directory");

    auto* l = app.add_subcommand("learn", "extremum-seeking campaign");
    l->add_option("config", cfg_path, "JSON config")->required();
    l->add_option("--iterations", iterations, "override sim.iterations");
    l->add_flag("--keep-episodes", keep, "write episodes/NNN.csv");
    l->add_option("--out", out_dir, "output directory");

    auto* d = app.add_subcommand("defaults", "print the default config");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kParse;
    }

    try {
        if (v->parsed())
            return cmd_validate(cfg_path);
        if (s->parsed())
            return cmd_simulate(cfg_path, out_dir);
        if (l->parsed())
            return cmd_learn(cfg_path, iterations, keep, out_dir);
        if (d->parsed()) {
            std::cout << mes::default_config_json();
            return kOk;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInvalid;
    }
    return kOk;
}
