#include "mes/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <system_error>

#include <unistd.h>

#include <json.hpp>

namespace mes {

using nlohmann::ordered_json;

std::string format_number(double value) {
    if (std::isnan(value))
        return "nan";
    if (std::isinf(value))
        return value > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& text) {
    if (text.find_first_of(",\"\r\n") == std::string::npos)
        return text;
    std::string out = "\"";
    for (char c : text) {
        if (c == '"')
            out += '"';
        out += c;
    }
    out += '"';
    return out;
}

namespace {

void row(std::string& out, std::initializer_list<std::string> fields) {
    bool first = true;
    for (const auto& f : fields) {
        if (!first)
            out += ',';
        out += csv_field(f);
        first = false;
    }
    out += "\r\n";
}

std::string n(double v) { return format_number(v); }

ordered_json number_or_null(double v) {
    if (std::isfinite(v))
        return v;
    return nullptr;
}

ordered_json gains_json(const GainSet& g) {
    return ordered_json{{"K1", g.K1}, {"K2", g.K2}, {"K3", g.K3}, {"k_robust", g.k_robust}};
}

ordered_json z_json(const ErrorVector& z) {
    return ordered_json{
        {"z1", number_or_null(z.z1)}, {"z2", number_or_null(z.z2)}, {"z3", number_or_null(z.z3)}};
}

ordered_json failure_json(const std::optional<CampaignFailure>& f) {
    if (!f)
        return nullptr;
    return ordered_json{{"iteration", f->iteration}, {"time", f->time}, {"message", f->message}};
}

} // namespace

std::string episode_csv(const Telemetry& telemetry, int stride) {
    if (stride < 1)
        throw std::invalid_argument("episode_csv: stride must be at least 1");
    std::string out;
    row(out, {"t", "x_a", "v", "i", "x_ref", "v_ref", "a_ref", "u", "z1", "z2", "z3",
              "in_invariant_set"});
    for (std::size_t k = 0; k < telemetry.size(); k += static_cast<std::size_t>(stride)) {
        const TelemetryRow& r = telemetry[k];
        row(out, {n(r.t), n(r.state.x_a), n(r.state.v), n(r.state.i), n(r.ref.pos), n(r.ref.vel),
                  n(r.ref.acc), n(r.u), n(r.z.z1), n(r.z.z2), n(r.z.z3),
                  r.in_invariant_set ? "1" : "0"});
    }
    return out;
}

std::string campaign_csv(const std::vector<IterationRecord>& records) {
    std::string out;
    row(out, {"I", "Q", "K1", "K2", "K3", "k_robust", "z1_tf", "z2_tf", "z3_tf", "amp_stage",
              "hurwitz_rejected"});
    for (const auto& r : records) {
        row(out, {std::to_string(r.index), n(r.Q), n(r.gains_used.K1), n(r.gains_used.K2),
                  n(r.gains_used.K3), n(r.gains_used.k_robust), n(r.z_terminal.z1),
                  n(r.z_terminal.z2), n(r.z_terminal.z3), std::to_string(r.amp_stage),
                  r.hurwitz_rejected ? "1" : "0"});
    }
    return out;
}

std::string simulate_summary_json(const IterationRecord* record, const GainSet& gains,
                                  const std::optional<CampaignFailure>& failure) {
    ordered_json j;
    j["mode"] = "simulate";
    j["gains"] = gains_json(gains);
    j["diverged"] = failure.has_value();
    j["failure"] = failure_json(failure);
    if (record && !failure) {
        j["Q"] = record->Q;
        j["terminal_error"] = z_json(record->z_terminal);
        j["max_abs_error"] = {record->max_abs_z[0], record->max_abs_z[1], record->max_abs_z[2]};
        j["in_invariant_set_at_tf"] = record->in_invariant_set_at_tf;
        j["position_range_violated"] = record->position_range_violated;
    } else {
        j["Q"] = nullptr;
        j["terminal_error"] = nullptr;
    }
    return j.dump(2) + "\n";
}

std::string learn_summary_json(const CampaignResult& result, int iterations_requested) {
    // Only complete records carry a meaningful cost.
    std::vector<const IterationRecord*> done;
    for (const auto& r : result.records)
        if (!(result.failure && r.index == result.failure->iteration))
            done.push_back(&r);

    ordered_json j;
    j["mode"] = "learn";
    j["iterations_requested"] = iterations_requested;
    j["iterations_completed"] = done.size();
    j["diverged"] = result.failure.has_value();
    j["failure"] = failure_json(result.failure);
    if (done.empty()) {
        j["Q_first"] = nullptr;
        j["Q_final"] = nullptr;
        j["Q_mean_last_third"] = nullptr;
        j["final_gains"] = nullptr;
        j["final_terminal_error"] = nullptr;
    } else {
        const std::size_t tail = std::max<std::size_t>(1, done.size() / 3);
        double sum = 0.0;
        for (std::size_t k = done.size() - tail; k < done.size(); ++k)
            sum += done[k]->Q;
        j["Q_first"] = done.front()->Q;
        j["Q_final"] = done.back()->Q;
        j["Q_mean_last_third"] = sum / static_cast<double>(tail);
        j["final_gains"] = gains_json(done.back()->gains_used);
        j["final_terminal_error"] = z_json(done.back()->z_terminal);
    }
    int rejected = 0, range = 0;
    for (const auto* r : done) {
        rejected += r->hurwitz_rejected ? 1 : 0;
        range += r->position_range_violated ? 1 : 0;
    }
    j["hurwitz_rejections"] = rejected;
    j["position_range_violations"] = range;
    j["final_amp_stage"] = result.final_bank.stage;
    return j.dump(2) + "\n";
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp" + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out)
            throw std::runtime_error("write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw std::runtime_error("cannot rename onto " + path.string() + ": " + ec.message());
    }
}

} // namespace mes
