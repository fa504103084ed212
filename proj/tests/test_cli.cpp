#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <doctest.h>
#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "mes_cli_test";

struct Run {
    int code;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), {});
}

Run run(const std::string& args, const std::string& env = "") {
    fs::create_directories(kWork);
    const fs::path err = kWork / "stderr.txt";
    const std::string cmd = env + " \"" MES_AUTOTUNE_BIN "\" " + args + " > /dev/null 2> \"" +
                            err.string() + "\"";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(err)};
}

fs::path write_config(const std::string& name, const std::string& text) {
    fs::create_directories(kWork);
    const fs::path p = kWork / name;
    std::ofstream(p) << text;
    return p;
}

std::size_t count_lines(const std::string& s) {
    std::size_t n = 0;
    for (char c : s)
        n += c == '\n' ? 1 : 0;
    return n;
}

const std::string kDefault = MES_CONFIG_DIR "/default.json";

} // namespace

TEST_CASE("validate") {
    CHECK(run("validate " + kDefault).code == 0);

    const auto triple = write_config("triple.json", R"({"es": {"channels": [
        {"omega_rad_per_s": 1, "amplitude": 200}, {"omega_rad_per_s": 2, "amplitude": 120},
        {"omega_rad_per_s": 3, "amplitude": 20}, {"omega_rad_per_s": 6.1, "amplitude": 0.2}]}})");
    const Run t = run("validate " + triple.string());
    CHECK(t.code == 2);
    CHECK(t.err.find("1 + 2 = 3") != std::string::npos);
    CHECK(count_lines(t.err) == 1);

    const auto gains = write_config("gains.json", R"({"gains": {"K1": 500}})");
    const Run g = run("validate " + gains.string());
    CHECK(g.code == 2);
    CHECK(g.err.find("gains not Hurwitz") != std::string::npos);

    const auto both = write_config("both.json",
                                   R"({"gains": {"K1": 500}, "cost": {"C1": 0}})");
    const Run b = run("validate " + both.string());
    CHECK(b.code == 2);
    CHECK(count_lines(b.err) == 2);

    const auto broken = write_config("broken.json", "{\n  \"gains\": {\"K1\": -500,,}\n}\n");
    const Run p = run("validate " + broken.string());
    CHECK(p.code == 1);
    CHECK(p.err.find("line 2") != std::string::npos);

    const auto unknown = write_config("unknown.json", R"({"gains": {"K4": 1}})");
    CHECK(run("validate " + unknown.string()).code == 2);

    CHECK(run("validate " + (kWork / "missing.json").string()).code == 1);
    CHECK(run("frobnicate").code == 1);
}

TEST_CASE("simulate writes one row per stride") {
    const fs::path out = kWork / "sim";
    fs::remove_all(out);
    REQUIRE(run("simulate " + kDefault + " --no-learning --out " + out.string()).code == 0);
    const std::string csv = slurp(out / "episode.csv");
    CHECK(count_lines(csv) == 1 + 1 + 100000 / 10);
    const auto j = nlohmann::json::parse(slurp(out / "summary.json"));
    CHECK_FALSE(j["diverged"].get<bool>());
    CHECK(std::abs(j["terminal_error"]["z2"].get<double>()) > 0.0);

    const fs::path again = kWork / "sim2";
    REQUIRE(run("simulate " + kDefault + " --out " + again.string()).code == 0);
    CHECK(slurp(again / "episode.csv") == csv);
}

TEST_CASE("simulate under exact cancellation") {
    const auto cfg = write_config("exact.json", R"({"disturbance": {"delta_k_N_per_m": 0,
        "delta_eta_kg_per_s": 0}, "gains": {"k_robust": 0}})");
    const fs::path out = kWork / "exact";
    REQUIRE(run("simulate " + cfg.string() + " --out " + out.string()).code == 0);
    const auto j = nlohmann::json::parse(slurp(out / "summary.json"));
    const double z1 = j["terminal_error"]["z1"].get<double>();
    CHECK(std::abs(z1 - -3.4119991139191334e-06) <= 1e-6 * 3.4119991139191334e-06);
}

TEST_CASE("output directory precedence") {
    const auto cfg = write_config("dir.json", R"({"output": {"dir": ")" +
                                                  (kWork / "from_config").string() + R"("}})");
    fs::remove_all(kWork / "from_config");
    fs::remove_all(kWork / "from_env");
    fs::remove_all(kWork / "from_flag");
    REQUIRE(run("simulate " + cfg.string()).code == 0);
    CHECK(fs::exists(kWork / "from_config" / "episode.csv"));
    const std::string env = "MES_AUTOTUNE_OUT=\"" + (kWork / "from_env").string() + "\"";
    REQUIRE(run("simulate " + cfg.string(), env).code == 0);
    CHECK(fs::exists(kWork / "from_env" / "summary.json"));
    REQUIRE(run("simulate " + cfg.string() + " --out " + (kWork / "from_flag").string(), env)
                .code == 0);
    CHECK(fs::exists(kWork / "from_flag" / "summary.json"));
}

TEST_CASE("divergence exits 3 and keeps partial output") {
    const auto cfg = write_config("diverge.json",
                                  R"({"controller": {"acceleration_source": "nominal_model"},
                                      "sim": {"iterations": 3}})");
    const fs::path out = kWork / "div";
    fs::remove_all(out);
    const Run s = run("simulate " + cfg.string() + " --out " + out.string());
    CHECK(s.code == 3);
    CHECK(count_lines(slurp(out / "episode.csv")) >= 2);
    const auto j = nlohmann::json::parse(slurp(out / "summary.json"));
    CHECK(j["diverged"].get<bool>());

    const Run l = run("learn " + cfg.string() + " --out " + out.string());
    CHECK(l.code == 3);
    CHECK(fs::exists(out / "campaign.csv"));
    CHECK(nlohmann::json::parse(slurp(out / "summary.json"))["diverged"].get<bool>());
}

TEST_CASE("learn writes the campaign and optional episodes") {
    const auto cfg = write_config("short.json", R"({"sim": {"dt_s": 1e-4, "stride": 100}})");
    const fs::path out = kWork / "learn";
    fs::remove_all(out);
    REQUIRE(run("learn " + cfg.string() + " --iterations 4 --keep-episodes --out " +
                out.string())
                .code == 0);
    const std::string csv = slurp(out / "campaign.csv");
    CHECK(count_lines(csv) == 5);
    for (const char* f : {"001.csv", "002.csv", "003.csv", "004.csv"})
        CHECK(count_lines(slurp(out / "episodes" / f)) == 1 + 1 + 100);
    const auto j = nlohmann::json::parse(slurp(out / "summary.json"));
    CHECK(j["iterations_completed"].get<int>() == 4);

    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    const double q1 = std::stod(line.substr(line.find(',') + 1));
    CHECK(j["Q_first"].get<double>() == q1);
    CHECK(q1 > 0.0);

    CHECK(run("learn " + cfg.string() + " --iterations 0 --out " + out.string()).code == 2);
}

TEST_CASE("unit-suffixed and SI configs give identical runs") {
    const auto a = write_config("mm.json", R"({"plant": {"k_spring_N_per_mm": 158},
        "sim": {"dt_s": 1e-4, "iterations": 3}})");
    const auto b = write_config("si.json", R"({"plant": {"k_spring_N_per_m": 158000},
        "sim": {"dt_s": 1e-4, "iterations": 3}})");
    REQUIRE(run("learn " + a.string() + " --out " + (kWork / "mm").string()).code == 0);
    REQUIRE(run("learn " + b.string() + " --out " + (kWork / "si").string()).code == 0);
    CHECK(slurp(kWork / "mm" / "campaign.csv") == slurp(kWork / "si" / "campaign.csv"));
}
