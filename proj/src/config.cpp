#include "kpo/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace kpo {

KpoParams KpoSection::to_params() const {
    KpoParams p;
    p.resonance_freq = mhz(resonance_frequency_mhz);
    p.pump_detuning = mhz(pump_detuning_mhz);
    if (resonance_frequency_mhz != 0)
        p.pump_freq = 2.0 * (p.resonance_freq - p.pump_detuning);
    p.kerr = mhz(kerr_mhz);
    p.pump_amplitude = mhz(pump_amplitude_mhz);
    p.kappa_ext = mhz(kappa_ext_mhz);
    p.dephasing = mhz(gamma_mhz);
    p.kappa_int =
        kappa_int_from_budget(mhz(kappa_tot_mhz), p.kappa_ext, p.dephasing);
    p.flux_bias = flux_bias;
    p.dfreq_dcurrent = mhz(dfreq_dcurrent_mhz_per_ua) * 1e6;  // per A
    p.validate();
    return p;
}

TwoKpoParams RunConfig::to_two_kpo() const {
    if (!kpo2) throw InvalidParams("config has no [kpo2] section");
    TwoKpoParams two;
    two.kpo1 = kpo1.to_params();
    two.kpo2 = kpo2->to_params();
    two.coupling = mhz(coupling.g_mhz);
    two.pump_freq_halfdiff = mhz(coupling.delta_p_mhz);
    two.pump_phase_halfdiff = coupling.theta_p_rad;
    if (coupling.delta_p_mhz == 0 && two.kpo1.pump_freq != 0 &&
        two.kpo2.pump_freq != 0)
        two.pump_freq_halfdiff = (two.kpo2.pump_freq - two.kpo1.pump_freq) / 2.0;
    two.validate();
    return two;
}

std::optional<DriveSpec> RunConfig::drive_spec() const {
    if (!drive.power_dbm && !drive.omega_in_mhz) return std::nullopt;
    DriveSpec d;
    if (drive.omega_in_mhz) {
        d.amplitude = mhz(*drive.omega_in_mhz);
    } else {
        const double omega_in = mhz(drive.input_frequency_mhz);
        d.amplitude = input_power_to_amplitude(
            *drive.power_dbm + drive.power_correction_db,
            kpo1.to_params().kappa_ext, omega_in);
    }
    d.detuning = mhz(drive.detuning_mhz);
    d.phase = drive.theta_rad;
    return d;
}

namespace {

struct RawEntry {
    std::string key;
    std::string value;
    int line = 0;
};

struct RawSection {
    std::string name;
    std::vector<RawEntry> entries;
    int line = 0;
};

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<RawSection> tokenize(const std::string& text) {
    std::vector<RawSection> sections;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("unterminated section header", line_no);
            sections.push_back({trim(line.substr(1, line.size() - 2)), {}, line_no});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected key = value", line_no);
        if (sections.empty())
            throw ConfigError("key outside any section", line_no);
        sections.back().entries.push_back(
            {trim(line.substr(0, eq)), trim(line.substr(eq + 1)), line_no});
    }
    return sections;
}

double parse_double(const RawEntry& e) {
    try {
        size_t pos = 0;
        const double v = std::stod(e.value, &pos);
        if (pos != e.value.size())
            throw ConfigError("trailing characters after number for key '" +
                                  e.key + "'",
                              e.line);
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError("cannot parse number for key '" + e.key + "'", e.line);
    }
}

long parse_long(const RawEntry& e) {
    const double v = parse_double(e);
    if (v != std::floor(v))
        throw ConfigError("key '" + e.key + "' requires an integer", e.line);
    return long(v);
}

bool parse_bool(const RawEntry& e) {
    if (e.value == "true" || e.value == "1") return true;
    if (e.value == "false" || e.value == "0") return false;
    throw ConfigError("key '" + e.key + "' requires true/false", e.line);
}

std::vector<double> parse_list(const RawEntry& e) {
    std::vector<double> out;
    std::string item;
    std::istringstream in(e.value);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty())
            throw ConfigError("empty list element for key '" + e.key + "'",
                              e.line);
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ConfigError("cannot parse list element for key '" + e.key + "'",
                              e.line);
        }
    }
    if (out.empty())
        throw ConfigError("key '" + e.key + "' requires a list", e.line);
    return out;
}

void parse_kpo(const RawSection& sec, KpoSection& k) {
    for (const auto& e : sec.entries) {
        if (e.key == "flux_bias") k.flux_bias = parse_double(e);
        else if (e.key == "resonance_frequency_mhz") k.resonance_frequency_mhz = parse_double(e);
        else if (e.key == "kappa_tot_mhz") k.kappa_tot_mhz = parse_double(e);
        else if (e.key == "kappa_ext_mhz") k.kappa_ext_mhz = parse_double(e);
        else if (e.key == "kerr_mhz") k.kerr_mhz = parse_double(e);
        else if (e.key == "pump_detuning_mhz") k.pump_detuning_mhz = parse_double(e);
        else if (e.key == "pump_amplitude_mhz") k.pump_amplitude_mhz = parse_double(e);
        else if (e.key == "gamma_mhz") k.gamma_mhz = parse_double(e);
        else if (e.key == "dfreq_dcurrent_mhz_per_ua") k.dfreq_dcurrent_mhz_per_ua = parse_double(e);
        else throw ConfigError("unknown key '" + e.key + "' in [" + sec.name + "]", e.line);
    }
}

}  // namespace

RunConfig RunConfig::parse_string(const std::string& text) {
    RunConfig cfg;
    bool saw_kpo1 = false;
    for (const auto& sec : tokenize(text)) {
        if (sec.name == "kpo1") {
            parse_kpo(sec, cfg.kpo1);
            saw_kpo1 = true;
        } else if (sec.name == "kpo2") {
            KpoSection k;
            parse_kpo(sec, k);
            cfg.kpo2 = k;
        } else if (sec.name == "coupling") {
            for (const auto& e : sec.entries) {
                if (e.key == "g_mhz") cfg.coupling.g_mhz = parse_double(e);
                else if (e.key == "delta_p_mhz") cfg.coupling.delta_p_mhz = parse_double(e);
                else if (e.key == "theta_p_rad") cfg.coupling.theta_p_rad = parse_double(e);
                else throw ConfigError("unknown key '" + e.key + "' in [coupling]", e.line);
            }
        } else if (sec.name == "simulation") {
            for (const auto& e : sec.entries) {
                if (e.key == "dim") cfg.simulation.dim = int(parse_long(e));
                else if (e.key == "rel_tol") cfg.simulation.rel_tol = parse_double(e);
                else if (e.key == "abs_tol") cfg.simulation.abs_tol = parse_double(e);
                else if (e.key == "t_end_us") cfg.simulation.t_end_us = parse_double(e);
                else if (e.key == "output_stride_ns") cfg.simulation.output_stride_ns = parse_double(e);
                else if (e.key == "sim_bin_width_us") cfg.simulation.sim_bin_width_us = parse_double(e);
                else if (e.key == "exp_bin_width_us") cfg.simulation.exp_bin_width_us = parse_double(e);
                else if (e.key == "ramp") cfg.simulation.ramp = parse_bool(e);
                else if (e.key == "ramp_duration_us") cfg.simulation.ramp_duration_us = parse_double(e);
                else throw ConfigError("unknown key '" + e.key + "' in [simulation]", e.line);
            }
        } else if (sec.name == "drive") {
            for (const auto& e : sec.entries) {
                if (e.key == "power_dbm") cfg.drive.power_dbm = parse_double(e);
                else if (e.key == "omega_in_mhz") cfg.drive.omega_in_mhz = parse_double(e);
                else if (e.key == "detuning_mhz") cfg.drive.detuning_mhz = parse_double(e);
                else if (e.key == "theta_rad") cfg.drive.theta_rad = parse_double(e);
                else if (e.key == "input_frequency_mhz") cfg.drive.input_frequency_mhz = parse_double(e);
                else if (e.key == "power_correction_db") cfg.drive.power_correction_db = parse_double(e);
                else throw ConfigError("unknown key '" + e.key + "' in [drive]", e.line);
            }
            if (cfg.drive.power_dbm && cfg.drive.omega_in_mhz)
                throw ConfigError("[drive] must set only one of power_dbm / omega_in_mhz",
                                  sec.line);
            if (cfg.drive.power_dbm && cfg.drive.input_frequency_mhz <= 0)
                throw ConfigError("[drive] power_dbm requires input_frequency_mhz",
                                  sec.line);
        } else if (sec.name == "sweep") {
            for (const auto& e : sec.entries) {
                if (e.key == "detuning_start_mhz") cfg.sweep.detuning_start_mhz = parse_double(e);
                else if (e.key == "detuning_stop_mhz") cfg.sweep.detuning_stop_mhz = parse_double(e);
                else if (e.key == "detuning_step_mhz") cfg.sweep.detuning_step_mhz = parse_double(e);
                else if (e.key == "power_list_dbm") cfg.sweep.power_list_dbm = parse_list(e);
                else if (e.key == "omega_list_mhz") cfg.sweep.omega_list_mhz = parse_list(e);
                else if (e.key == "theta_list_rad") cfg.sweep.theta_list_rad = parse_list(e);
                else if (e.key == "exclusion_mhz") cfg.sweep.exclusion_mhz = parse_double(e);
                else throw ConfigError("unknown key '" + e.key + "' in [sweep]", e.line);
            }
            if (cfg.sweep.detuning_step_mhz <= 0)
                throw ConfigError("[sweep] detuning_step_mhz must be > 0", sec.line);
        } else if (sec.name == "readout") {
            for (const auto& e : sec.entries) {
                if (e.key == "if_freqs_mhz") cfg.readout.if_freqs_mhz = parse_list(e);
                else if (e.key == "sample_rate_msps") cfg.readout.sample_rate_msps = parse_double(e);
                else if (e.key == "noise_sigma") cfg.readout.noise_sigma = parse_double(e);
                else if (e.key == "trials") cfg.readout.trials = parse_long(e);
                else if (e.key == "seed") cfg.readout.seed = uint64_t(parse_long(e));
                else if (e.key == "tau_flip_us") cfg.readout.tau_flip_us = parse_double(e);
                else if (e.key == "amplitude") cfg.readout.amplitude = parse_double(e);
                else if (e.key == "bin_duration_us") cfg.readout.bin_duration_us = parse_double(e);
                else throw ConfigError("unknown key '" + e.key + "' in [readout]", e.line);
            }
        } else if (sec.name == "collision") {
            for (const auto& e : sec.entries) {
                if (e.key == "threshold_mhz") cfg.collision.threshold_mhz = parse_double(e);
                else if (e.key == "energy_cutoff_mhz") cfg.collision.energy_cutoff_mhz = parse_double(e);
                else if (e.key == "include_ground_doublet") cfg.collision.include_ground_doublet = parse_bool(e);
                else throw ConfigError("unknown key '" + e.key + "' in [collision]", e.line);
            }
        } else {
            throw ConfigError("unknown section [" + sec.name + "]", sec.line);
        }
    }
    if (!saw_kpo1) throw ConfigError("missing required section [kpo1]", 0);
    return cfg;
}

RunConfig RunConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path, 0);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str());
}

namespace {

void dump_kpo(std::ostream& out, const std::string& name, const KpoSection& k) {
    out << "[" << name << "]\n";
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "flux_bias = %.17g\n"
                  "resonance_frequency_mhz = %.17g\n"
                  "kappa_tot_mhz = %.17g\n"
                  "kappa_ext_mhz = %.17g\n"
                  "kerr_mhz = %.17g\n"
                  "pump_detuning_mhz = %.17g\n"
                  "pump_amplitude_mhz = %.17g\n"
                  "gamma_mhz = %.17g\n"
                  "dfreq_dcurrent_mhz_per_ua = %.17g\n",
                  k.flux_bias, k.resonance_frequency_mhz, k.kappa_tot_mhz,
                  k.kappa_ext_mhz, k.kerr_mhz, k.pump_detuning_mhz,
                  k.pump_amplitude_mhz, k.gamma_mhz,
                  k.dfreq_dcurrent_mhz_per_ua);
    out << buf;
}

void dump_list(std::ostream& out, const std::string& key,
               const std::vector<double>& v) {
    if (v.empty()) return;
    out << key << " = ";
    for (size_t i = 0; i < v.size(); ++i) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", v[i]);
        out << (i ? ", " : "") << buf;
    }
    out << "\n";
}

}  // namespace

std::string RunConfig::dump() const {
    std::ostringstream out;
    char buf[1024];
    dump_kpo(out, "kpo1", kpo1);
    if (kpo2) dump_kpo(out, "kpo2", *kpo2);
    std::snprintf(buf, sizeof buf,
                  "[coupling]\ng_mhz = %.17g\ndelta_p_mhz = %.17g\n"
                  "theta_p_rad = %.17g\n",
                  coupling.g_mhz, coupling.delta_p_mhz, coupling.theta_p_rad);
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "[simulation]\ndim = %d\nrel_tol = %.17g\nabs_tol = %.17g\n"
                  "t_end_us = %.17g\noutput_stride_ns = %.17g\n"
                  "sim_bin_width_us = %.17g\nexp_bin_width_us = %.17g\n"
                  "ramp = %s\nramp_duration_us = %.17g\n",
                  simulation.dim, simulation.rel_tol, simulation.abs_tol,
                  simulation.t_end_us, simulation.output_stride_ns,
                  simulation.sim_bin_width_us, simulation.exp_bin_width_us,
                  simulation.ramp ? "true" : "false",
                  simulation.ramp_duration_us);
    out << buf;
    out << "[drive]\n";
    if (drive.power_dbm) {
        std::snprintf(buf, sizeof buf, "power_dbm = %.17g\n", *drive.power_dbm);
        out << buf;
    }
    if (drive.omega_in_mhz) {
        std::snprintf(buf, sizeof buf, "omega_in_mhz = %.17g\n", *drive.omega_in_mhz);
        out << buf;
    }
    std::snprintf(buf, sizeof buf,
                  "detuning_mhz = %.17g\ntheta_rad = %.17g\n"
                  "input_frequency_mhz = %.17g\npower_correction_db = %.17g\n",
                  drive.detuning_mhz, drive.theta_rad,
                  drive.input_frequency_mhz, drive.power_correction_db);
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "[sweep]\ndetuning_start_mhz = %.17g\n"
                  "detuning_stop_mhz = %.17g\ndetuning_step_mhz = %.17g\n",
                  sweep.detuning_start_mhz, sweep.detuning_stop_mhz,
                  sweep.detuning_step_mhz);
    out << buf;
    dump_list(out, "power_list_dbm", sweep.power_list_dbm);
    dump_list(out, "omega_list_mhz", sweep.omega_list_mhz);
    dump_list(out, "theta_list_rad", sweep.theta_list_rad);
    std::snprintf(buf, sizeof buf, "exclusion_mhz = %.17g\n", sweep.exclusion_mhz);
    out << buf;
    out << "[readout]\n";
    dump_list(out, "if_freqs_mhz", readout.if_freqs_mhz);
    std::snprintf(buf, sizeof buf,
                  "sample_rate_msps = %.17g\nnoise_sigma = %.17g\n"
                  "trials = %ld\nseed = %llu\ntau_flip_us = %.17g\n"
                  "amplitude = %.17g\nbin_duration_us = %.17g\n",
                  readout.sample_rate_msps, readout.noise_sigma, readout.trials,
                  (unsigned long long)readout.seed, readout.tau_flip_us,
                  readout.amplitude, readout.bin_duration_us);
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "[collision]\nthreshold_mhz = %.17g\n"
                  "energy_cutoff_mhz = %.17g\ninclude_ground_doublet = %s\n",
                  collision.threshold_mhz, collision.energy_cutoff_mhz,
                  collision.include_ground_doublet ? "true" : "false");
    out << buf;
    return out.str();
}

}  // namespace kpo
