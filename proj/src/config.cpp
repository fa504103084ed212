#include "mes/config.hpp"

#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include <json.hpp>

namespace mes {

using nlohmann::json;

ConfigSchemaError::ConfigSchemaError(std::vector<std::string> problems)
    : std::runtime_error(problems.empty() ? "invalid configuration" : problems.front()),
      problems_(std::move(problems)) {}

namespace {

// value * mul / div; exact for the integer factors used here.
struct Unit {
    double mul = 1.0;
    double div = 1.0;
};

constexpr Unit kSI{};
constexpr Unit kMm{1.0, 1000.0};
constexpr Unit kPerMm{1000.0, 1.0};

// Walks one JSON object, records problems instead of stopping at the first.
class Section {
  public:
    Section(const json* obj, std::string path, std::vector<std::string>& problems)
        : obj_(obj), path_(std::move(path)), problems_(problems) {
        if (obj_ && !obj_->is_object()) {
            problems_.push_back(path_ + ": expected an object");
            obj_ = nullptr;
        }
    }

    ~Section() {
        if (!obj_)
            return;
        for (const auto& [key, _] : obj_->items())
            if (!seen_.count(key))
                problems_.push_back(path_ + ": unknown key \"" + key + "\"");
    }

    const json* child(const std::string& key) {
        seen_.insert(key);
        if (!obj_)
            return nullptr;
        auto it = obj_->find(key);
        return it == obj_->end() ? nullptr : &*it;
    }

    void number(const std::string& key, double& out) {
        if (auto v = number_opt(key))
            out = *v;
    }

    std::optional<double> number_opt(const std::string& key) {
        const json* v = child(key);
        if (!v)
            return std::nullopt;
        if (!v->is_number()) {
            problems_.push_back(path_ + "." + key + ": expected a number");
            return std::nullopt;
        }
        return v->get<double>();
    }

    void integer(const std::string& key, int& out) {
        const json* v = child(key);
        if (!v)
            return;
        if (!v->is_number_integer()) {
            problems_.push_back(path_ + "." + key + ": expected an integer");
            return;
        }
        out = v->get<int>();
    }

    void boolean(const std::string& key, bool& out) {
        const json* v = child(key);
        if (!v)
            return;
        if (!v->is_boolean()) {
            problems_.push_back(path_ + "." + key + ": expected true or false");
            return;
        }
        out = v->get<bool>();
    }

    void string(const std::string& key, std::string& out) {
        const json* v = child(key);
        if (!v)
            return;
        if (!v->is_string()) {
            problems_.push_back(path_ + "." + key + ": expected a string");
            return;
        }
        out = v->get<std::string>();
    }

    // Quantity given under one of several unit-tagged keys.
    void quantity(const std::vector<std::pair<std::string, Unit>>& keys, double& out_si) {
        std::optional<double> found;
        std::string found_key;
        for (const auto& [key, to_si] : keys) {
            if (auto v = number_opt(key)) {
                if (found) {
                    problems_.push_back(path_ + ": both \"" + found_key + "\" and \"" + key +
                                        "\" given");
                    continue;
                }
                found = *v * to_si.mul / to_si.div;
                found_key = key;
            }
        }
        if (found)
            out_si = *found;
    }

    void problem(const std::string& msg) { problems_.push_back(path_ + ": " + msg); }
    const std::string& path() const { return path_; }

  private:
    const json* obj_;
    std::string path_;
    std::vector<std::string>& problems_;
    std::set<std::string> seen_;
};

void read_plant(Section& s, PlantParams& p) {
    s.number("m_kg", p.m);
    s.number("R_ohm", p.R);
    s.number("eta_kg_per_s", p.eta_nominal);
    s.quantity({{"x0_spring_m", kSI}, {"x0_spring_mm", kMm}}, p.x0_spring);
    s.quantity({{"k_spring_N_per_m", kSI}, {"k_spring_N_per_mm", kPerMm}}, p.k_nominal);
    s.number("a_coil_N_m2_per_A2", p.a_coil);
    s.quantity({{"b_coil_m", kSI}, {"b_coil_mm", kMm}}, p.b_coil);
}

void read_channels(const json* arr, std::vector<std::string>& problems, ESBank& bank) {
    if (!arr)
        return;
    if (!arr->is_array()) {
        problems.push_back("es.channels: expected an array");
        return;
    }
    if (arr->size() != bank.channels.size()) {
        problems.push_back("es.channels: expected " + std::to_string(bank.channels.size()) +
                           " channels (K1, K2, K3, k_robust)");
        return;
    }
    for (std::size_t c = 0; c < arr->size(); ++c) {
        Section ch(&(*arr)[c], "es.channels[" + std::to_string(c) + "]", problems);
        ESChannel& e = bank.channels[c];
        ch.number("omega_rad_per_s", e.omega);
        ch.number("amplitude", e.base_amplitude);
        e.current_amplitude = e.base_amplitude;
        std::string name = e.name;
        ch.string("name", name);
        if (name != e.name)
            ch.problem("channel order is fixed; expected name \"" + e.name + "\"");
    }
}

void read_schedule(const json* arr, std::vector<std::string>& problems, AmplitudeSchedule& sched) {
    if (!arr)
        return;
    if (!arr->is_array()) {
        problems.push_back("es.schedule: expected an array");
        return;
    }
    sched.stages.clear();
    for (std::size_t k = 0; k < arr->size(); ++k) {
        Section st(&(*arr)[k], "es.schedule[" + std::to_string(k) + "]", problems);
        AmplitudeStage stage;
        st.number("cost_fraction", stage.cost_fraction);
        st.number("multiplier", stage.multiplier);
        st.boolean("scale_by_first_cost", stage.scale_by_first_cost);
        if (const json* pc = st.child("per_channel")) {
            if (!pc->is_array()) {
                st.problem("per_channel: expected an array of numbers");
            } else {
                for (const auto& v : *pc) {
                    if (!v.is_number()) {
                        st.problem("per_channel: expected an array of numbers");
                        break;
                    }
                    stage.per_channel.push_back(v.get<double>());
                }
            }
        }
        sched.stages.push_back(stage);
    }
}

void read_cost(Section& s, CostWeights& w) {
    std::string mode = w.mode == CostMode::terminal ? "terminal" : "integral";
    s.string("mode", mode);
    if (mode == "terminal") {
        w.mode = CostMode::terminal;
    } else if (mode == "integral") {
        w.mode = CostMode::integral;
    } else {
        s.problem("mode must be \"terminal\" or \"integral\"");
    }
    s.number("C1", w.terminal[0]);
    s.number("C2", w.terminal[1]);
    s.number("C3", w.terminal[2]);
    s.number("input_weight", w.input_weight);
    if (const json* m = s.child("state_weight")) {
        bool ok = m->is_array() && m->size() == 3;
        Eigen::Matrix3d C;
        for (std::size_t r = 0; ok && r < 3; ++r) {
            const json& row = (*m)[r];
            ok = row.is_array() && row.size() == 3;
            for (std::size_t c = 0; ok && c < 3; ++c) {
                ok = row[c].is_number();
                if (ok)
                    C(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                        row[c].get<double>();
            }
        }
        if (ok)
            w.state_weight = C;
        else
            s.problem("state_weight: expected a 3x3 array of numbers");
    }
}

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t k = 0; k < byte && k < text.size(); ++k) {
        if (text[k] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

} // namespace

RunConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        // byte is 1-based and points one past the offending character.
        const std::size_t at = e.byte > 0 ? e.byte - 1 : 0;
        const auto [line, col] = line_column(text, at);
        std::ostringstream os;
        os << "parse error at line " << line << ", column " << col << ": " << e.what();
        throw ConfigParseError(os.str(), line, col);
    }

    RunConfig rc;
    rc.campaign = default_campaign();
    CampaignConfig& cfg = rc.campaign;
    std::vector<std::string> problems;
    {
        Section root(&doc, "config", problems);

        {
            Section s(root.child("plant"), "plant", problems);
            read_plant(s, cfg.plant);
        }
        {
            Section s(root.child("reference"), "reference", problems);
            double t_f = 1.0;
            double x_f = cfg.plant.x_f;
            s.number("t_f_s", t_f);
            s.quantity({{"x_f_m", kSI}, {"x_f_mm", kMm}}, x_f);
            cfg.plant.x_f = x_f;
            if (t_f > 0)
                cfg.reference = build_quintic(t_f, x_f);
            else
                s.problem("t_f_s must be positive");
        }

        cfg.bounds = default_bounds(cfg.plant);
        {
            Section s(root.child("bounds"), "bounds", problems);
            s.quantity({{"delta_k_max_N_per_m", kSI}, {"delta_k_max_N_per_mm", kPerMm}},
                       cfg.bounds.delta_k_max);
            s.number("delta_eta_max_kg_per_s", cfg.bounds.delta_eta_max);
        }
        cfg.disturbance = default_disturbance(cfg.bounds);
        {
            Section s(root.child("disturbance"), "disturbance", problems);
            s.quantity({{"delta_k_N_per_m", kSI}, {"delta_k_N_per_mm", kPerMm}},
                       cfg.disturbance.delta_k);
            s.number("delta_eta_kg_per_s", cfg.disturbance.delta_eta);
        }
        {
            Section s(root.child("initial"), "initial", problems);
            s.quantity({{"z1_m", kSI}, {"z1_mm", kMm}}, cfg.initial.z1);
            s.quantity({{"z2_m_per_s", kSI}, {"z2_mm_per_s", kMm}}, cfg.initial.z2);
            if (auto i0 = s.number_opt("i0_A"))
                cfg.initial.i0 = *i0;
        }
        {
            Section s(root.child("gains"), "gains", problems);
            s.number("K1", cfg.nominal_gains.K1);
            s.number("K2", cfg.nominal_gains.K2);
            s.number("K3", cfg.nominal_gains.K3);
            s.number("k_robust", cfg.nominal_gains.k_robust);
            s.number("k_robust_min", cfg.k_robust_min);
        }
        const double nominal[4] = {cfg.nominal_gains.K1, cfg.nominal_gains.K2,
                                   cfg.nominal_gains.K3, cfg.nominal_gains.k_robust};
        for (std::size_t c = 0; c < cfg.bank.channels.size(); ++c)
            cfg.bank.channels[c].nominal_value = nominal[c];
        {
            Section s(root.child("controller"), "controller", problems);
            std::string src = "measured";
            s.string("acceleration_source", src);
            if (src == "measured")
                cfg.acceleration_source = AccelerationSource::measured;
            else if (src == "nominal_model")
                cfg.acceleration_source = AccelerationSource::nominal_model;
            else
                s.problem("acceleration_source must be \"measured\" or \"nominal_model\"");
            s.number("i_min_A", cfg.i_min);
        }
        {
            Section s(root.child("es"), "es", problems);
            read_channels(s.child("channels"), problems, cfg.bank);
            read_schedule(s.child("schedule"), problems, cfg.schedule);
        }
        {
            Section s(root.child("cost"), "cost", problems);
            read_cost(s, cfg.cost);
        }
        {
            Section s(root.child("sim"), "sim", problems);
            s.number("dt_s", cfg.dt);
            s.integer("iterations", cfg.iterations);
            s.integer("stride", rc.stride);
            if (rc.stride < 1)
                s.problem("stride must be at least 1");
        }
        {
            Section s(root.child("output"), "output", problems);
            s.string("dir", rc.output_dir);
        }
    }
    if (!problems.empty())
        throw ConfigSchemaError(std::move(problems));
    return rc;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string default_config_json() {
    const CampaignConfig d = default_campaign();
    nlohmann::ordered_json j;
    j["plant"] = {{"m_kg", d.plant.m},
                  {"R_ohm", d.plant.R},
                  {"eta_kg_per_s", d.plant.eta_nominal},
                  {"x0_spring_mm", 8},
                  {"k_spring_N_per_mm", 158},
                  {"a_coil_N_m2_per_A2", d.plant.a_coil},
                  {"b_coil_m", d.plant.b_coil}};
    j["reference"] = {{"t_f_s", 1.0}, {"x_f_mm", 0.5}};
    j["bounds"] = {{"delta_k_max_N_per_m", d.bounds.delta_k_max},
                   {"delta_eta_max_kg_per_s", d.bounds.delta_eta_max}};
    j["disturbance"] = {{"delta_k_N_per_m", d.disturbance.delta_k},
                        {"delta_eta_kg_per_s", d.disturbance.delta_eta}};
    j["initial"] = {{"z1_mm", 0.01}, {"z2_mm_per_s", 0.1}};
    j["gains"] = {{"K1", d.nominal_gains.K1},
                  {"K2", d.nominal_gains.K2},
                  {"K3", d.nominal_gains.K3},
                  {"k_robust", d.nominal_gains.k_robust},
                  {"k_robust_min", d.k_robust_min}};
    j["controller"] = {{"acceleration_source", "measured"}, {"i_min_A", d.i_min}};
    auto channels = nlohmann::ordered_json::array();
    for (const auto& c : d.bank.channels)
        channels.push_back(
            {{"name", c.name}, {"omega_rad_per_s", c.omega}, {"amplitude", c.base_amplitude}});
    auto stages = nlohmann::ordered_json::array();
    for (const auto& s : d.schedule.stages)
        stages.push_back({{"cost_fraction", s.cost_fraction},
                          {"multiplier", s.multiplier},
                          {"scale_by_first_cost", s.scale_by_first_cost}});
    j["es"] = {{"channels", channels}, {"schedule", stages}};
    j["cost"] = {{"mode", "terminal"}, {"C1", 500}, {"C2", 500}, {"C3", 10}};
    j["sim"] = {{"dt_s", d.dt}, {"iterations", d.iterations}, {"stride", 10}};
    j["output"] = {{"dir", "out"}};
    return j.dump(2) + "\n";
}

} // namespace mes
