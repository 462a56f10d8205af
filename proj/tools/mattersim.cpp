// mattersim: standing-wave diffraction phases, Bloch bands and the
// contrast-interferometer signal, from JSON configs to CSV/JSON files.
//
// Exit codes: 0 success, 2 config error, 3 numerical non-convergence,
// 4 degenerate fit.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mattersim/analytic.hpp"
#include "mattersim/bloch.hpp"
#include "mattersim/core.hpp"
#include "mattersim/interferometer.hpp"
#include "mattersim/propagator.hpp"

using nlohmann::json;
namespace ms = mattersim;

namespace {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require_keys(const json& obj, const std::string& context,
                  const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw ConfigError(context + " must be a JSON object");
    for (const auto& item : obj.items()) {
        if (!allowed.count(item.key())) {
            throw ConfigError("unknown key '" + item.key() + "' in " + context);
        }
    }
}

double get_number(const json& obj, const std::string& key) {
    if (!obj.contains(key)) throw ConfigError("missing key '" + key + "'");
    if (!obj[key].is_number()) throw ConfigError("key '" + key + "' must be a number");
    return obj[key].get<double>();
}

double get_number_or(const json& obj, const std::string& key, double fallback) {
    return obj.contains(key) ? get_number(obj, key) : fallback;
}

int get_int(const json& obj, const std::string& key) {
    if (!obj.contains(key)) throw ConfigError("missing key '" + key + "'");
    if (!obj[key].is_number_integer()) throw ConfigError("key '" + key + "' must be an integer");
    return obj[key].get<int>();
}

std::string get_string(const json& obj, const std::string& key) {
    if (!obj.contains(key)) throw ConfigError("missing key '" + key + "'");
    if (!obj[key].is_string()) throw ConfigError("key '" + key + "' must be a string");
    return obj[key].get<std::string>();
}

ms::PulseEnvelope parse_pulse(const json& obj, const std::string& context) {
    require_keys(obj, context,
                 {"shape", "q_max", "tau_start", "tau_end", "center", "sigma", "samples"});
    const std::string shape = get_string(obj, "shape");
    if (shape == "rectangular") {
        return ms::PulseEnvelope::rectangular(get_number(obj, "q_max"),
                                              get_number(obj, "tau_start"),
                                              get_number(obj, "tau_end"));
    }
    if (shape == "gaussian") {
        return ms::PulseEnvelope::gaussian(get_number(obj, "q_max"),
                                           get_number(obj, "center"),
                                           get_number(obj, "sigma"));
    }
    if (shape == "tabulated") {
        if (!obj.contains("samples") || !obj["samples"].is_array()) {
            throw ConfigError(context + ": tabulated pulse needs a 'samples' array");
        }
        std::vector<std::pair<double, double>> samples;
        for (const auto& row : obj["samples"]) {
            if (!row.is_array() || row.size() != 2) {
                throw ConfigError(context + ": each sample must be a [tau, q] pair");
            }
            samples.emplace_back(row[0].get<double>(), row[1].get<double>());
        }
        return ms::PulseEnvelope::tabulated(std::move(samples));
    }
    throw ConfigError(context + ": unknown pulse shape '" + shape + "'");
}

ms::PulseEnvelope parse_bragg(const json& obj, double mirror_time) {
    if (obj.contains("pi")) {
        require_keys(obj, "bragg", {"pi", "shape", "q", "sigma"});
        if (!obj["pi"].is_boolean() || !obj["pi"].get<bool>()) {
            throw ConfigError("bragg: 'pi' must be true when present");
        }
        const std::string shape = get_string(obj, "shape");
        if (shape == "rectangular") return ms::rect_pi_pulse(get_number(obj, "q"), mirror_time);
        if (shape == "gaussian") return ms::gaussian_pi_pulse(get_number(obj, "sigma"), mirror_time);
        throw ConfigError("bragg: pi pulses support rectangular and gaussian shapes");
    }
    return parse_pulse(obj, "bragg");
}

ms::PropagationSettings parse_settings(const json& obj) {
    require_keys(obj, "settings",
                 {"phase_tolerance", "max_step", "truncation_threshold", "diagonal_offset"});
    ms::PropagationSettings s;
    s.phase_tolerance = get_number_or(obj, "phase_tolerance", s.phase_tolerance);
    s.max_step = get_number_or(obj, "max_step", s.max_step);
    s.truncation_threshold = get_number_or(obj, "truncation_threshold", s.truncation_threshold);
    s.diagonal_offset = get_number_or(obj, "diagonal_offset", s.diagonal_offset);
    s.validate();
    return s;
}

ms::SimulationMode parse_mode(const std::string& mode) {
    if (mode == "analytic") return ms::SimulationMode::Analytic;
    if (mode == "numeric") return ms::SimulationMode::Numeric;
    throw ConfigError("mode must be 'analytic' or 'numeric'");
}

ms::InterferometerConfig parse_interferometer(const json& cfg, const std::string& mode_override) {
    ms::InterferometerConfig out;
    if (cfg.contains("preset")) {
        require_keys(cfg, "config",
                     {"command", "preset", "mirror_time", "mode", "detection", "power_scale",
                      "settings"});
        const std::string preset = get_string(cfg, "preset");
        if (preset != "mit-2002") throw ConfigError("unknown preset '" + preset + "'");
        out = ms::mit_2002_preset(get_number(cfg, "mirror_time"));
        std::cerr << "warning: the mit-2002 mirror pulse peaks at q_max ~ 2.43, outside the "
                     "validity range of the second-order two-level model\n";
    } else {
        require_keys(cfg, "config",
                     {"command", "mode", "gamma", "first_pulse_q", "first_pulse", "mirror_time",
                      "bragg", "detection", "power_scale", "settings"});
        out.mirror_time = get_number(cfg, "mirror_time");
        if (!cfg.contains("bragg")) throw ConfigError("missing key 'bragg'");
        out.bragg = parse_bragg(cfg["bragg"], out.mirror_time);
        out.gamma = get_number_or(cfg, "gamma", 0.0);
        out.first_pulse_q = get_number_or(cfg, "first_pulse_q", out.first_pulse_q);
        if (cfg.contains("first_pulse")) {
            out.first_pulse = parse_pulse(cfg["first_pulse"], "first_pulse");
            out.gamma = out.resolved_gamma();
        }
    }
    if (!mode_override.empty()) {
        out.mode = parse_mode(mode_override);
    } else if (cfg.contains("mode")) {
        out.mode = parse_mode(get_string(cfg, "mode"));
    }
    if (cfg.contains("detection")) {
        require_keys(cfg["detection"], "detection", {"tau_start", "span", "samples"});
        ms::DetectionWindow w;
        w.tau_start = get_number(cfg["detection"], "tau_start");
        w.span = get_number_or(cfg["detection"], "span", w.span);
        w.samples = cfg["detection"].contains("samples") ? get_int(cfg["detection"], "samples")
                                                         : w.samples;
        out.detection = w;
    }
    out.power_scale = get_number_or(cfg, "power_scale", 0.0);
    if (cfg.contains("settings")) out.settings = parse_settings(cfg["settings"]);
    out.validate();
    if (out.mode == ms::SimulationMode::Analytic && out.bragg.q_max > 1.0) {
        std::cerr << "warning: analytic mode with q_max = " << out.bragg.q_max
                  << " extrapolates the second-order model beyond q = 1\n";
    }
    return out;
}

std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void write_atomic(const std::string& path, const std::string& content) {
    const std::filesystem::path target(path);
    if (target.has_parent_path()) {
        std::filesystem::create_directories(target.parent_path());
    }
    const std::filesystem::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot open output file " + tmp.string());
        out << content;
        if (!out) throw ConfigError("cannot write output file " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
}

json fit_to_json(const ms::SignalTrace& trace) {
    json fit;
    fit["mode"] = trace.mode == ms::SimulationMode::Analytic ? "analytic" : "numeric";
    fit["degenerate"] = trace.fit.degenerate;
    if (trace.fit.degenerate) {
        fit["phase_mod_pi"] = nullptr;
    } else {
        fit["phase_mod_pi"] = trace.fit.phase;
    }
    fit["amplitude"] = trace.fit.amplitude;
    fit["offset"] = trace.fit.offset;
    fit["residual"] = trace.fit.residual;
    return fit;
}

json load_config(const std::string& path, const std::string& command) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    json cfg;
    try {
        in >> cfg;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
    const std::string declared = get_string(cfg, "command");
    if (!command.empty() && declared != command) {
        throw ConfigError("config declares command '" + declared + "', expected '" + command + "'");
    }
    return cfg;
}

int run_bands(const json& cfg, const std::string& out_path, bool dry_run) {
    require_keys(cfg, "config", {"command", "q", "n_kappa", "n_bands", "p_span"});
    const double q = get_number(cfg, "q");
    const int n_kappa = get_int(cfg, "n_kappa");
    const int n_bands = get_int(cfg, "n_bands");
    const int p_span = cfg.contains("p_span") ? get_int(cfg, "p_span") : 0;
    if (q < 0.0) throw ConfigError("q must be non-negative");
    if (n_kappa < 2) throw ConfigError("n_kappa must be at least 2");
    const int span = p_span == 0 ? ms::default_p_span(q) : p_span;
    if (n_bands < 1 || n_bands > 2 * span) {
        throw ConfigError("n_bands must satisfy 1 <= n_bands <= 2 p_span");
    }
    if (dry_run) return 0;

    const auto bands = ms::band_structure(q, n_kappa, n_bands, p_span);
    std::ostringstream csv;
    csv << "kappa,band,energy\n";
    for (std::size_t i = 0; i < bands.kappa_grid.size(); ++i) {
        for (std::size_t b = 0; b < bands.energies[i].size(); ++b) {
            csv << format_value(bands.kappa_grid[i]) << ',' << b << ','
                << format_value(bands.energies[i][b]) << '\n';
        }
    }
    write_atomic(out_path, csv.str());
    return 0;
}

int run_diffract(const json& cfg, const std::string& out_path, const std::string& mode_override,
                 bool dry_run) {
    require_keys(cfg, "config",
                 {"command", "mode", "model", "gamma", "initial_order", "kappa", "pulse",
                  "tau_from", "tau_to", "settings"});
    std::string mode = cfg.contains("mode") ? get_string(cfg, "mode") : "analytic";
    if (!mode_override.empty()) mode = mode_override;

    ms::PlaneWaveState state = ms::PlaneWaveState::basis_state(0.0, 0);
    if (mode == "analytic") {
        const std::string model = get_string(cfg, "model");
        if (model == "raman-nath") {
            const double gamma = get_number(cfg, "gamma");
            if (gamma < 0.0) throw ConfigError("gamma must be non-negative");
            if (dry_run) return 0;
            state = ms::raman_nath_state(gamma, ms::raman_nath_min_span(gamma));
        } else if (model == "bragg") {
            const int order = cfg.contains("initial_order") ? get_int(cfg, "initial_order") : 0;
            if (order < -1 || order > 1) {
                throw ConfigError("bragg model requires initial_order in {-1, 0, +1}");
            }
            if (!cfg.contains("pulse")) throw ConfigError("missing key 'pulse'");
            const auto pulse = parse_pulse(cfg["pulse"], "pulse");
            if (pulse.q_max > 1.0) {
                std::cerr << "warning: q_max = " << pulse.q_max
                          << " extrapolates the second-order model beyond q = 1\n";
            }
            if (dry_run) return 0;
            state = ms::bragg_apply(ms::PlaneWaveState::basis_state(0.0, order), pulse);
        } else {
            throw ConfigError("analytic model must be 'raman-nath' or 'bragg'");
        }
    } else if (mode == "numeric") {
        const int order = cfg.contains("initial_order") ? get_int(cfg, "initial_order") : 0;
        const double kappa = get_number_or(cfg, "kappa", 0.0);
        ms::PulseEnvelope pulse = ms::PulseEnvelope::rectangular(0.0, 0.0, 0.0);
        if (cfg.contains("pulse")) pulse = parse_pulse(cfg["pulse"], "pulse");
        const double tau_from = get_number_or(cfg, "tau_from", 0.0);
        double tau_to;
        if (cfg.contains("tau_to")) {
            tau_to = get_number(cfg, "tau_to");
        } else if (cfg.contains("pulse")) {
            tau_to = pulse.tau_end;
        } else {
            throw ConfigError("numeric mode needs 'tau_to' when no pulse is given");
        }
        ms::PropagationSettings settings;
        if (cfg.contains("settings")) settings = parse_settings(cfg["settings"]);
        if (!(tau_from <= tau_to)) throw ConfigError("tau_from must not exceed tau_to");
        if (dry_run) return 0;
        state = ms::propagate(ms::PlaneWaveState::basis_state(kappa, order), pulse, tau_from,
                              tau_to, settings);
    } else {
        throw ConfigError("mode must be 'analytic' or 'numeric'");
    }

    std::ostringstream csv;
    csv << "order,population,phase\n";
    for (const auto& line : ms::diffraction_spectrum(state)) {
        csv << line.order << ',' << format_value(line.population) << ','
            << format_value(line.phase) << '\n';
    }
    write_atomic(out_path, csv.str());
    return 0;
}

int run_interferometer(const json& cfg, const std::string& out_path, const std::string& format,
                       const std::string& mode_override, bool dry_run) {
    const auto config = parse_interferometer(cfg, mode_override);
    if (dry_run) return 0;
    const auto trace = ms::simulate(config);

    if (format == "csv") {
        std::ostringstream csv;
        csv << "tau,signal\n";
        for (std::size_t i = 0; i < trace.taus.size(); ++i) {
            csv << format_value(trace.taus[i]) << ',' << format_value(trace.values[i]) << '\n';
        }
        write_atomic(out_path, csv.str());
        std::cout << fit_to_json(trace).dump(2) << '\n';
    } else {
        json doc = fit_to_json(trace);
        doc["trace"]["tau"] = trace.taus;
        doc["trace"]["signal"] = trace.values;
        write_atomic(out_path, doc.dump(2) + "\n");
    }
    return trace.fit.degenerate ? 4 : 0;
}

int run_sensitivity(const json& cfg, const std::string& out_path, const std::string& format,
                    const std::string& mode_override, bool dry_run) {
    if (!cfg.contains("epsilons") || !cfg["epsilons"].is_array() || cfg["epsilons"].empty()) {
        throw ConfigError("sensitivity needs a non-empty 'epsilons' array");
    }
    std::vector<double> epsilons;
    for (const auto& e : cfg["epsilons"]) {
        if (!e.is_number()) throw ConfigError("'epsilons' entries must be numbers");
        epsilons.push_back(e.get<double>());
        if (std::abs(epsilons.back()) > 0.1) throw ConfigError("|epsilon| must not exceed 0.1");
    }
    json base = cfg;
    base.erase("epsilons");
    base["command"] = "interferometer";
    const auto config = parse_interferometer(base, mode_override);
    if (dry_run) return 0;

    const auto result = ms::power_sensitivity(config, epsilons);
    json doc;
    doc["epsilons"] = result.epsilons;
    doc["phases"] = result.phases;
    doc["fitted_slope"] = result.fitted_slope;
    doc["level_shift_slope"] = result.level_shift_slope;
    doc["full_model_slope"] = result.full_model_slope;
    json deltas = json::array();
    for (double eps : epsilons) deltas.push_back(result.level_shift_slope * eps);
    doc["level_shift_delta_phi"] = deltas;

    if (format == "csv") {
        std::ostringstream csv;
        csv << "epsilon,phase\n";
        for (std::size_t i = 0; i < epsilons.size(); ++i) {
            csv << format_value(epsilons[i]) << ',' << format_value(result.phases[i]) << '\n';
        }
        write_atomic(out_path, csv.str());
        std::cout << doc.dump(2) << '\n';
    } else {
        write_atomic(out_path, doc.dump(2) + "\n");
    }
    return 0;
}

int run_design_pulse(const json& cfg, const std::string& out_path, bool dry_run) {
    require_keys(cfg, "config", {"command", "shape", "duration", "sigma", "samples"});
    const std::string shape = get_string(cfg, "shape");
    json doc;
    doc["shape"] = shape;
    double q_max;
    ms::PulseEnvelope designed = ms::PulseEnvelope::rectangular(0.0, 0.0, 0.0);
    if (shape == "rectangular") {
        const double duration = get_number(cfg, "duration");
        if (dry_run) return 0;
        q_max = ms::design_pi_pulse(ms::PulseShape::Rectangular, duration);
        designed = ms::PulseEnvelope::rectangular(q_max, 0.0, duration);
        doc["duration"] = duration;
    } else if (shape == "gaussian") {
        const double sigma = get_number(cfg, "sigma");
        if (dry_run) return 0;
        q_max = ms::design_pi_pulse(ms::PulseShape::Gaussian, sigma);
        designed = ms::PulseEnvelope::gaussian(q_max, 0.0, sigma);
        doc["sigma"] = sigma;
    } else if (shape == "tabulated") {
        json pulse;
        pulse["shape"] = "tabulated";
        pulse["samples"] = cfg.contains("samples") ? cfg["samples"] : json::array();
        const auto base = parse_pulse(pulse, "samples");
        if (dry_run) return 0;
        q_max = ms::design_pi_pulse(base);
        designed = base.scaled(q_max / base.q_max);
    } else {
        throw ConfigError("shape must be rectangular, gaussian or tabulated");
    }
    doc["q_max"] = q_max;
    doc["rabi_phase"] = ms::rabi_phase(designed);
    write_atomic(out_path, doc.dump(2) + "\n");
    return 0;
}

int dispatch(const std::string& command, const json& cfg, const std::string& out_path,
             const std::string& format, const std::string& mode_override, bool dry_run) {
    if (command == "bands") return run_bands(cfg, out_path, dry_run);
    if (command == "diffract") return run_diffract(cfg, out_path, mode_override, dry_run);
    if (command == "interferometer") {
        return run_interferometer(cfg, out_path, format, mode_override, dry_run);
    }
    if (command == "sensitivity") {
        return run_sensitivity(cfg, out_path, format, mode_override, dry_run);
    }
    if (command == "design-pulse") return run_design_pulse(cfg, out_path, dry_run);
    throw ConfigError("unknown command '" + command + "'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"matter-wave diffraction phases and contrast-interferometer signals"};
    app.require_subcommand(1);

    std::string config_path, out_path, format = "csv", mode_override;

    auto add_common = [&](CLI::App* sub, bool needs_out) {
        sub->add_option("--config", config_path, "JSON config file")->required();
        if (needs_out) sub->add_option("--out", out_path, "output file")->required();
        sub->add_option("--format", format, "output format")
            ->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--mode", mode_override, "override the config mode")
            ->check(CLI::IsMember({"analytic", "numeric"}));
    };

    add_common(app.add_subcommand("bands", "band structure CSV"), true);
    add_common(app.add_subcommand("diffract", "diffraction spectrum CSV"), true);
    add_common(app.add_subcommand("interferometer", "signal trace and phase fit"), true);
    add_common(app.add_subcommand("sensitivity", "phase vs laser power scan"), true);
    add_common(app.add_subcommand("design-pulse", "solve for the pi-pulse coupling"), true);
    add_common(app.add_subcommand("validate-config", "check a config without running"), false);

    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        if (command == "validate-config") {
            const json cfg = load_config(config_path, "");
            const std::string declared = get_string(cfg, "command");
            dispatch(declared, cfg, "", format, mode_override, /*dry_run=*/true);
            std::cout << "ok\n";
            return 0;
        }
        const json cfg = load_config(config_path, command);
        return dispatch(command, cfg, out_path, format, mode_override, /*dry_run=*/false);
    } catch (const ms::NonConvergenceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const ms::DegenerateFitError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
