#include "ledmaint/config.hpp"

#include "ledmaint/csv.hpp"

#include <boost/crc.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace ledmaint {

std::vector<double> Range::values() const {
    if (!(step > 0.0) || stop < start) {
        return {};
    }
    std::vector<double> out;
    const double guard = 1e-9 * std::max(1.0, std::abs(stop));
    for (long i = 0;; ++i) {
        const double v = std::round((start + static_cast<double>(i) * step) * 1e10) / 1e10;
        if (v > stop + guard) break;
        out.push_back(v);
    }
    return out;
}

Scenario named_scenario(const std::string& name) {
    if (name == "S1") return {"S1", {21.82, 2818.09}};
    if (name == "S2") return {"S2", {25.61, 3301.09}};
    if (name == "S3") return {"S3", {17.91, 2342.09}};
    throw ConfigError("scenario.name: unknown scenario '" + name + "' (expected S1, S2 or S3)");
}

void apply_scenario(RunConfig& config, const std::string& name) {
    config.scenario = named_scenario(name);
}

void apply_desk_preset(RunConfig& config) {
    config.runs = 200;
    config.t_over_days = 7300.0;
    config.t_pm = {1460.0, 7300.0, 1460.0};
    config.h_om = {0.2, 1.0, 0.2};
    config.n_path = 20;
    config.n_ps = 10;
}

std::filesystem::path RunConfig::resolve(const std::string& file) const {
    const std::filesystem::path p(file);
    return p.is_absolute() ? p : std::filesystem::path(output_dir) / p;
}

void RunConfig::validate() const {
    auto fail = [](const std::string& field, const std::string& why) {
        throw ConfigError(field + ": " + why);
    };
    if (output_dir.empty()) fail("paths.output_dir", "must not be empty");
    if (!(s_e > 0.0)) fail("requirements.s_e", "must be positive");
    if (!(s_u > 0.0 && s_u <= 1.0)) fail("requirements.s_u", "must lie in (0, 1]");
    if (!(t_over_days > 0.0) || !std::isfinite(t_over_days)) fail("simulation.t_over_days", "must be positive");
    if (runs == 0) fail("simulation.runs", "must be positive");
    if (!(record_interval_days > 0.0)) fail("simulation.record_interval_days", "must be positive");
    if (!(d_cm_pf_days > 0.0)) fail("simulation.d_cm_pf_days", "must be positive");
    if (!(d_cm_df_days > 0.0)) fail("simulation.d_cm_df_days", "must be positive");
    if (!(d_replace_days > 0.0)) fail("simulation.d_replace_days", "must be positive");
    if (!(use_temperature_k > 0.0)) fail("simulation.use_temperature_k", "must be positive");
    if (!(duty_cycle > 0.0 && duty_cycle <= 1.0)) fail("simulation.duty_cycle", "must lie in (0, 1]");
    if (!(path_step_days > 0.0)) fail("simulation.path_step_days", "must be positive");
    if (seed_mode != "independent" && seed_mode != "common") fail("simulation.seed_mode", "expected independent or common");
    if (!(policy_t_pm > 0.0 && policy_t_pm <= t_over_days)) fail("policy.t_pm", "must lie in (0, t_over_days]");
    if (!(policy_h_om >= 0.0 && policy_h_om <= 1.0)) fail("policy.h_om", "must lie in [0, 1]");
    const auto tp = t_pm.values();
    const auto hv = h_om.values();
    if (tp.empty()) fail("grid.t_pm", "empty range");
    if (hv.empty()) fail("grid.h_om", "empty range");
    if (tp.front() <= 0.0 || tp.back() > t_over_days) fail("grid.t_pm", "values must lie in (0, t_over_days]");
    if (hv.front() < 0.0 || hv.back() > 1.0) fail("grid.h_om", "values must lie in [0, 1]");
    if (scenario.name != "custom") named_scenario(scenario.name);
    try {
        scenario.driver.validate();
    } catch (const std::exception& e) {
        fail("scenario.weibull", e.what());
    }
    if (!(alpha > 0.0 && alpha < 1.0)) fail("optimizer.alpha", "must lie in (0, 1)");
    if (n_path == 0) fail("optimizer.n_path", "must be positive");
    if (n_ps == 0) fail("optimizer.n_ps", "must be positive");
    if (topology != "pairwise" && topology != "against_best") fail("optimizer.topology", "expected pairwise or against_best");
    if (chains < 2) fail("calibration.chains", "need at least 2 for split R-hat");
    if (warmup < 0) fail("calibration.warmup", "must be >= 0");
    if (samples < 4) fail("calibration.samples", "need at least 4");
    if (test_temps_k.empty()) fail("calibration.test_temps_k", "empty list");
    for (double t : test_temps_k) {
        if (!(t > 0.0)) fail("calibration.test_temps_k", "temperatures must be positive");
    }
    if (units_per_temp < 0) fail("calibration.units_per_temp", "must be >= 0");
    if (!(inspection_step_h > 0.0) || !(total_h >= inspection_step_h)) fail("calibration.inspection_step_h", "need 0 < step <= total_h");
    try {
        true_theta.validate();
    } catch (const std::exception& e) {
        fail("calibration.true_theta", e.what());
    }
    if (n_states < 2) fail("surrogate.n_states", "must be at least 2");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) fail("surrogate.train_fraction", "must lie in (0, 1)");
    if (!(target_e_avg > ambient_floor)) fail("surrogate.target_e_avg", "must exceed ambient_floor");
    if (!(ambient_floor >= 0.0)) fail("surrogate.ambient_floor", "must be >= 0");
}

namespace {

using Getter = std::function<std::string(const RunConfig&)>;
using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

struct Field {
    std::string section, key;
    Getter get;
    Setter set;
};

double parse_double(const std::string& v, const std::string& field) {
    try {
        return csv::to_double(v, field);
    } catch (const FormatError&) {
        throw ConfigError(field + ": expected a number, got '" + v + "'");
    }
}

long long parse_int(const std::string& v, const std::string& field) {
    try {
        return csv::to_int(v, field);
    } catch (const FormatError&) {
        throw ConfigError(field + ": expected an integer, got '" + v + "'");
    }
}

bool parse_bool(const std::string& v, const std::string& field) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(field + ": expected true or false, got '" + v + "'");
}

template <class T>
Field num(const char* section, const char* key, T RunConfig::*member) {
    return {section, key,
            [member](const RunConfig& c) {
                if constexpr (std::is_floating_point_v<T>) {
                    return csv::format(c.*member);
                } else {
                    return std::to_string(c.*member);
                }
            },
            [member](RunConfig& c, const std::string& v, const std::string& f) {
                if constexpr (std::is_floating_point_v<T>) {
                    c.*member = parse_double(v, f);
                } else {
                    const long long x = parse_int(v, f);
                    if constexpr (std::is_unsigned_v<T>) {
                        if (x < 0) throw ConfigError(f + ": must be non-negative");
                    }
                    c.*member = static_cast<T>(x);
                }
            }};
}

Field str(const char* section, const char* key, std::string RunConfig::*member) {
    return {section, key, [member](const RunConfig& c) { return c.*member; },
            [member](RunConfig& c, const std::string& v, const std::string&) { c.*member = v; }};
}

Field range(const char* section, const char* key, Range RunConfig::*member) {
    return {section, key,
            [member](const RunConfig& c) {
                const Range& r = c.*member;
                return csv::format(r.start) + ":" + csv::format(r.step) + ":" + csv::format(r.stop);
            },
            [member](RunConfig& c, const std::string& v, const std::string& f) {
                const auto parts = csv::split(v, ':');
                if (parts.size() != 3) throw ConfigError(f + ": expected start:step:stop, got '" + v + "'");
                c.*member = {parse_double(parts[0], f), parse_double(parts[2], f), parse_double(parts[1], f)};
            }};
}

Field theta_field(const char* key, double Theta::*member) {
    return {"calibration", key, [member](const RunConfig& c) { return csv::format(c.true_theta.*member); },
            [member](RunConfig& c, const std::string& v, const std::string& f) {
                c.true_theta.*member = parse_double(v, f);
            }};
}

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        str("paths", "output_dir", &RunConfig::output_dir),
        str("paths", "layout_file", &RunConfig::layout_file),
        str("paths", "pairs_file", &RunConfig::pairs_file),
        str("paths", "adt_file", &RunConfig::adt_file),
        str("paths", "draws_file", &RunConfig::draws_file),
        str("paths", "surrogate_file", &RunConfig::surrogate_file),
        str("paths", "pareto_file", &RunConfig::pareto_file),
        num("run", "seed", &RunConfig::seed),
        num("run", "workers", &RunConfig::workers),
        num("requirements", "s_e", &RunConfig::s_e),
        num("requirements", "s_u", &RunConfig::s_u),
        num("simulation", "t_over_days", &RunConfig::t_over_days),
        num("simulation", "runs", &RunConfig::runs),
        num("simulation", "record_interval_days", &RunConfig::record_interval_days),
        num("simulation", "d_cm_pf_days", &RunConfig::d_cm_pf_days),
        num("simulation", "d_cm_df_days", &RunConfig::d_cm_df_days),
        num("simulation", "d_replace_days", &RunConfig::d_replace_days),
        num("simulation", "use_temperature_k", &RunConfig::use_temperature_k),
        num("simulation", "duty_cycle", &RunConfig::duty_cycle),
        num("simulation", "path_step_days", &RunConfig::path_step_days),
        str("simulation", "seed_mode", &RunConfig::seed_mode),
        {"simulation", "keep_traces", [](const RunConfig& c) { return std::string(c.keep_traces ? "true" : "false"); },
         [](RunConfig& c, const std::string& v, const std::string& f) { c.keep_traces = parse_bool(v, f); }},
        num("policy", "t_pm", &RunConfig::policy_t_pm),
        num("policy", "h_om", &RunConfig::policy_h_om),
        range("grid", "t_pm", &RunConfig::t_pm),
        range("grid", "h_om", &RunConfig::h_om),
        {"scenario", "name", [](const RunConfig& c) { return c.scenario.name; },
         [](RunConfig& c, const std::string& v, const std::string&) {
             if (v == "custom") {
                 c.scenario.name = v;
             } else {
                 c.scenario = named_scenario(v);
             }
         }},
        {"scenario", "weibull_shape", [](const RunConfig& c) { return csv::format(c.scenario.driver.shape); },
         [](RunConfig& c, const std::string& v, const std::string& f) { c.scenario.driver.shape = parse_double(v, f); }},
        {"scenario", "weibull_scale_days", [](const RunConfig& c) { return csv::format(c.scenario.driver.scale_days); },
         [](RunConfig& c, const std::string& v, const std::string& f) {
             c.scenario.driver.scale_days = parse_double(v, f);
         }},
        num("optimizer", "alpha", &RunConfig::alpha),
        num("optimizer", "n_path", &RunConfig::n_path),
        num("optimizer", "n_ps", &RunConfig::n_ps),
        str("optimizer", "topology", &RunConfig::topology),
        num("calibration", "chains", &RunConfig::chains),
        num("calibration", "warmup", &RunConfig::warmup),
        num("calibration", "samples", &RunConfig::samples),
        {"calibration", "test_temps_k",
         [](const RunConfig& c) {
             std::string s;
             for (std::size_t i = 0; i < c.test_temps_k.size(); ++i) s += (i ? "," : "") + csv::format(c.test_temps_k[i]);
             return s;
         },
         [](RunConfig& c, const std::string& v, const std::string& f) {
             c.test_temps_k.clear();
             for (const auto& part : csv::split(v)) c.test_temps_k.push_back(parse_double(csv::trim(part), f));
         }},
        num("calibration", "units_per_temp", &RunConfig::units_per_temp),
        num("calibration", "inspection_step_h", &RunConfig::inspection_step_h),
        num("calibration", "total_h", &RunConfig::total_h),
        theta_field("true_ln_a", &Theta::ln_a),
        theta_field("true_b", &Theta::b),
        theta_field("true_ln_c", &Theta::ln_c),
        theta_field("true_e_a", &Theta::activation_energy),
        num("surrogate", "n_states", &RunConfig::n_states),
        num("surrogate", "train_fraction", &RunConfig::train_fraction),
        num("surrogate", "target_e_avg", &RunConfig::target_e_avg),
        num("surrogate", "ambient_floor", &RunConfig::ambient_floor),
    };
    return table;
}

} // namespace

RunConfig parse_config(const std::string& text) {
    boost::property_tree::ptree tree;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError("config syntax (line " + std::to_string(e.line()) + "): " + e.message());
    }
    std::map<std::string, const Field*> index;
    for (const auto& f : fields()) index[f.section + "." + f.key] = &f;

    RunConfig config;
    // Named scenarios must be applied before explicit Weibull overrides.
    std::vector<std::pair<const Field*, std::string>> deferred;
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty()) {
            throw ConfigError(section + ": key outside any section");
        }
        for (const auto& [key, value] : body) {
            const std::string name = section + "." + key;
            const auto it = index.find(name);
            if (it == index.end()) {
                throw ConfigError(name + ": unknown key");
            }
            const std::string v = csv::trim(value.data());
            if (name == "scenario.name") {
                it->second->set(config, v, name);
            } else {
                deferred.emplace_back(it->second, v);
            }
        }
    }
    for (const auto& [field, v] : deferred) {
        field->set(config, v, field->section + "." + field->key);
    }
    config.validate();
    return config;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read config file " + path.string());
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

std::string serialize_config(const RunConfig& config) {
    std::ostringstream out;
    std::string section;
    for (const auto& f : fields()) {
        if (f.section != section) {
            out << (section.empty() ? "" : "\n") << '[' << f.section << "]\n";
            section = f.section;
        }
        out << f.key << " = " << f.get(config) << '\n';
    }
    return out.str();
}

std::string config_hash(const RunConfig& config) {
    const std::string text = serialize_config(config);
    boost::crc_32_type crc;
    crc.process_bytes(text.data(), text.size());
    char buf[16];
    std::snprintf(buf, sizeof buf, "%08x", static_cast<unsigned>(crc.checksum()));
    return buf;
}

ModelBundle bundle_skeleton(const RunConfig& config) {
    ModelBundle b;
    b.requirements = {config.s_e, config.s_u};
    b.simulation.t_over = config.t_over_days;
    b.simulation.record_interval = config.record_interval_days;
    b.simulation.durations = {config.d_cm_pf_days, config.d_cm_df_days, config.d_replace_days};
    b.fleet.n_ps = config.n_ps;
    b.fleet.driver = config.scenario.driver;
    b.fleet.kelvin = config.use_temperature_k;
    b.fleet.clock = AgingClock{config.duty_cycle};
    b.fleet.grid_step = config.path_step_days;
    return b;
}

EvaluationOptions evaluation_options(const RunConfig& config) {
    EvaluationOptions o;
    o.runs = config.runs;
    o.master_seed = config.seed;
    o.seed_mode = config.seed_mode == "common" ? SeedMode::common : SeedMode::independent;
    return o;
}

WelchTopology welch_topology(const RunConfig& config) {
    return config.topology == "against_best" ? WelchTopology::against_best : WelchTopology::pairwise;
}

} // namespace ledmaint
