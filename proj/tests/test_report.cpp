#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <doctest.h>
#include <json.hpp>

#include "mes/report.hpp"

using namespace mes;
namespace fs = std::filesystem;

TEST_CASE("shortest round-trip numbers") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(-500.0) == "-500");
    CHECK(format_number(1e-5) == "1e-05");
    CHECK(format_number(0.0) == "0");
    CHECK(format_number(std::nan("")) == "nan");
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> e(-300, 300);
    for (int k = 0; k < 2000; ++k) {
        const double v = std::pow(10.0, e(rng) / 10.0) * (k % 2 ? -1.0 : 1.0);
        CHECK(std::strtod(format_number(v).c_str(), nullptr) == v);
    }
}

TEST_CASE("csv quoting") {
    CHECK(csv_field("plain") == "plain");
    CHECK(csv_field("a,b") == "\"a,b\"");
    CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(csv_field("two\nlines") == "\"two\nlines\"");
}

TEST_CASE("episode csv layout and stride") {
    Telemetry t(25);
    for (std::size_t k = 0; k < t.size(); ++k) {
        t[k].t = 0.1 * static_cast<double>(k);
        t[k].in_invariant_set = k % 2 == 0;
    }
    const std::string csv = episode_csv(t, 10);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,x_a,v,i,x_ref,v_ref,a_ref,u,z1,z2,z3,in_invariant_set\r");
    int rows = 0;
    while (std::getline(in, line))
        ++rows;
    CHECK(rows == 3);
    CHECK(csv.find("\r\n2,") != std::string::npos);
    CHECK_THROWS(episode_csv(t, 0));
}

TEST_CASE("campaign csv and summary agree") {
    CampaignResult r;
    for (int k = 1; k <= 6; ++k) {
        IterationRecord rec;
        rec.index = k;
        rec.Q = 1.0 / k;
        rec.gains_used = {-500.0 + k, -125, -26, 1};
        rec.z_terminal = {1e-5 * k, 2e-6, 0};
        rec.hurwitz_rejected = k == 3;
        r.records.push_back(rec);
    }
    r.q_first = 1.0;
    const std::string csv = campaign_csv(r.records);
    CHECK(csv.rfind("I,Q,K1,K2,K3,k_robust,z1_tf,z2_tf,z3_tf,amp_stage,hurwitz_rejected\r\n", 0) == 0);
    CHECK(csv.find("3,0.3333333333333333,-497,-125,-26,1,3.0000000000000004e-05,2e-06,0,0,1\r\n") !=
          std::string::npos);

    const auto j = nlohmann::ordered_json::parse(learn_summary_json(r, 6));
    CHECK(j["Q_first"].get<double>() == 1.0);
    CHECK(j["Q_final"].get<double>() == 1.0 / 6);
    CHECK(j["Q_mean_last_third"].get<double>() == (1.0 / 5 + 1.0 / 6) / 2);
    CHECK(j["hurwitz_rejections"].get<int>() == 1);
    CHECK(j["final_gains"]["K1"].get<double>() == -494.0);
    std::vector<std::string> keys;
    for (const auto& [k, _] : j.items())
        keys.push_back(k);
    CHECK(keys.front() == "mode");
    CHECK(keys[1] == "iterations_requested");
}

TEST_CASE("summary excludes the diverged iteration") {
    CampaignResult r;
    IterationRecord a;
    a.index = 1;
    a.Q = 2.0;
    r.records.push_back(a);
    r.failure = CampaignFailure{2, 0.4, "boom"};
    const auto j = nlohmann::ordered_json::parse(learn_summary_json(r, 5));
    CHECK(j["diverged"].get<bool>());
    CHECK(j["iterations_completed"].get<int>() == 1);
    CHECK(j["failure"]["iteration"].get<int>() == 2);
    CHECK(j["Q_final"].get<double>() == 2.0);
}

TEST_CASE("atomic writes replace the target and leave no temporaries") {
    const fs::path dir = fs::temp_directory_path() / "mes_report_test";
    fs::remove_all(dir);
    const fs::path f = dir / "sub" / "a.csv";
    write_file_atomic(f, "one\r\n");
    write_file_atomic(f, "two\r\n");
    std::ifstream in(f, std::ios::binary);
    std::string s((std::istreambuf_iterator<char>(in)), {});
    CHECK(s == "two\r\n");
    int entries = 0;
    for (const auto& e : fs::directory_iterator(dir / "sub")) {
        (void)e;
        ++entries;
    }
    CHECK(entries == 1);
    fs::remove_all(dir);
}
