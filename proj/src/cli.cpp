#include "rabi/cli.hpp"

#include "rabi/errors.hpp"
#include "rabi/fock.hpp"
#include "rabi/floquet.hpp"
#include "rabi/io.hpp"
#include "rabi/resonances.hpp"
#include "rabi/semiclassics.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace rabi::cli {

namespace {

using floquet::Vec3;

struct HelpRequested {
    std::string text;
};

const std::map<std::string, std::vector<std::string>>& command_keys() {
    static const std::map<std::string, std::vector<std::string>> keys{
        {"floquet", {"mu", "delta", "nmax"}},
        {"resonances", {"mu", "nmax", "kinds"}},
        {"curves", {"kinds", "mu-grid"}},
        {"dynamics", {"mu", "delta", "epsilon", "t-end", "dt", "polarization"}},
        {"oracle", {"mu", "delta", "nbar", "cutoff", "t-end", "dt", "polarization"}},
        {"compare", {"mu", "delta", "nbar", "cutoff", "t-end", "dt"}},
    };
    return keys;
}

const std::map<std::string, std::string>& command_help() {
    static const std::map<std::string, std::string> help{
        {"floquet", "Floquet solution: Rabi frequency and Fourier coefficients of the three modes"},
        {"resonances", "resonant detunings of the selected kinds at one mu"},
        {"curves", "resonance curves over a mu grid (failures recorded per point)"},
        {"dynamics", "semiclassical polarization trace, collapse time and splitting"},
        {"oracle", "exact truncated-Fock evolution and Husimi fragments at t-end"},
        {"compare", "semiclassical vs exact polarization on a common time grid"},
    };
    return help;
}

const std::map<std::string, std::string>& key_help() {
    static const std::map<std::string, std::string> help{
        {"mu", "interaction frequency scale mu (units of omega)"},
        {"delta", "detuning nu - omega"},
        {"epsilon", "semiclassical parameter 1/n_bar"},
        {"nbar", "mean photon number of the initial coherent state"},
        {"nmax", "Fourier truncation order"},
        {"cutoff", "number of Fock levels"},
        {"t-end", "final time (units of 1/omega)"},
        {"dt", "sampling interval"},
        {"kinds", "comma-separated resonance kinds (BS,TC,FC,RC,EN,VS,WS)"},
        {"mu-grid", "comma list or start:stop:step"},
        {"polarization", "initial qubit polarization x,y,z"},
    };
    return help;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

class Params {
public:
    explicit Params(const std::map<std::string, std::string>& p) : p_(p) {}

    bool has(const std::string& key) const { return p_.count(key) > 0; }

    double number(const std::string& key, double fallback) const {
        const auto it = p_.find(key);
        if (it == p_.end()) return fallback;
        try {
            const double v = io::parse_double(it->second);
            if (!std::isfinite(v)) throw ValidationError("");
            return v;
        } catch (const ValidationError&) {
            throw ValidationError("--" + key + ": expected a finite number, got '" + it->second + "'");
        }
    }

    int integer(const std::string& key, int fallback) const {
        const double v = number(key, fallback);
        if (v != std::floor(v) || std::abs(v) > 1e9) throw ValidationError("--" + key + ": expected an integer");
        return static_cast<int>(v);
    }

    std::vector<resonance::ResonanceKind> kinds() const {
        if (!has("kinds")) return {resonance::all_kinds.begin(), resonance::all_kinds.end()};
        std::vector<resonance::ResonanceKind> out;
        for (const auto& s : split_list(p_.at("kinds"))) out.push_back(resonance::kind_from_string(s));
        if (out.empty()) throw ValidationError("--kinds: empty list");
        return out;
    }

    std::vector<double> mu_grid() const {
        std::string s = has("mu-grid") ? p_.at("mu-grid") : "0.02:0.5:0.02";
        std::vector<double> out;
        if (s.find(':') != std::string::npos) {
            std::vector<double> parts;
            std::stringstream ss(s);
            std::string item;
            while (std::getline(ss, item, ':')) parts.push_back(io::parse_double(item));
            if (parts.size() != 3 || !(parts[2] > 0) || parts[1] < parts[0])
                throw ValidationError("--mu-grid: expected start:stop:step with step > 0");
            const auto count = static_cast<long>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
            if (count > 100000) throw ValidationError("--mu-grid: too many points");
            for (long i = 0; i <= count; ++i) out.push_back(parts[0] + static_cast<double>(i) * parts[2]);
        } else {
            for (const auto& item : split_list(s)) out.push_back(io::parse_double(item));
        }
        if (out.empty()) throw ValidationError("--mu-grid: empty grid");
        return out;
    }

    Vec3 polarization() const {
        if (!has("polarization")) return Vec3::UnitZ();
        const auto parts = split_list(p_.at("polarization"));
        if (parts.size() != 3) throw ValidationError("--polarization: expected x,y,z");
        Vec3 v{io::parse_double(parts[0]), io::parse_double(parts[1]), io::parse_double(parts[2])};
        if (!(v.norm() > 0)) throw ValidationError("--polarization: zero vector");
        return v / v.norm();
    }

private:
    const std::map<std::string, std::string>& p_;
};

std::vector<double> time_grid(double t_end, double dt) {
    if (!(dt > 0.0)) throw ValidationError("--dt must be positive");
    if (!(t_end >= 0.0)) throw ValidationError("--t-end must be >= 0");
    const auto steps = static_cast<long>(std::floor(t_end / dt + 1e-9));
    if (steps > 10'000'000) throw ValidationError("too many time samples");
    std::vector<double> t(static_cast<std::size_t>(steps) + 1);
    for (long i = 0; i <= steps; ++i) t[static_cast<std::size_t>(i)] = static_cast<double>(i) * dt;
    return t;
}

int default_cutoff(double n_bar) {
    return static_cast<int>(std::ceil(n_bar + 16.0 * std::sqrt(n_bar))) + 10;
}

floquet::FloquetParams floquet_params(const Params& p) {
    floquet::FloquetParams fp;
    fp.mu = p.number("mu", 0.1);
    fp.delta = p.number("delta", 0.0);
    fp.n_max = p.integer("nmax", floquet::FloquetParams{}.n_max);
    fp.validate();
    return fp;
}

double safe_collapse_time(const floquet::FloquetSolution& sol, const semiclassics::WavePacket& packet) {
    try {
        return semiclassics::collapse_time(sol, packet);
    } catch (const DegenerateCollapse&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

io::Table command_floquet(const Params& p) {
    return io::to_table(io::floquet_record(floquet::solve_floquet(floquet_params(p))));
}

io::Table command_resonances(const Params& p) {
    const double mu = p.number("mu", 0.1);
    const int n_max = p.integer("nmax", floquet::FloquetParams{}.n_max);
    std::vector<resonance::ResonanceResult> results;
    for (auto kind : p.kinds()) results.push_back(resonance::find_resonance(kind, mu, std::nullopt, n_max));
    auto t = io::to_table(results);
    t.add_meta("n_max", std::to_string(n_max));
    return t;
}

io::Table command_curves(const Params& p) {
    const auto kinds = p.kinds();
    const auto grid = p.mu_grid();
    return io::to_table(resonance::resonance_curves(kinds, grid));
}

io::Table command_dynamics(const Params& p) {
    floquet::FloquetParams fp;
    fp.mu = p.number("mu", 0.1);
    fp.delta = p.number("delta", 0.0);
    const auto sol = floquet::solve_floquet(fp);
    const auto packet = semiclassics::WavePacket::coherent(p.number("epsilon", 0.01), p.polarization());
    packet.validate();
    io::DynamicsRecord rec;
    rec.mu = fp.mu;
    rec.delta = fp.delta;
    rec.packet = packet;
    rec.collapse_time = safe_collapse_time(sol, packet);
    const double t_end = p.number("t-end", std::isfinite(rec.collapse_time) ? 3.0 * rec.collapse_time : 100.0);
    const auto times = time_grid(t_end, p.number("dt", 0.5));
    rec.trace = semiclassics::polarization_trace(sol, packet, times);
    rec.split = semiclassics::splitting(sol, packet);
    return io::to_table(rec);
}

fock::FockConfig fock_config(const Params& p, double default_t_end) {
    fock::FockConfig c;
    c.n_bar = p.number("nbar", 100.0);
    c.mu = p.number("mu", 0.1);
    c.delta = p.number("delta", 0.0);
    if (!(c.n_bar > 0.0 && c.n_bar <= 1e4)) throw ValidationError("--nbar must lie in (0, 1e4]");
    c.cutoff = p.integer("cutoff", default_cutoff(c.n_bar));
    c.dt = p.number("dt", 0.5);
    c.t_end = p.number("t-end", default_t_end);
    c.validate();
    return c;
}

io::Table command_oracle(const Params& p) {
    io::OracleRecord rec;
    rec.config = fock_config(p, 200.0);
    rec.polarization = p.polarization();
    rec.trace = fock::evolve(rec.config, rec.polarization);
    const std::vector<double> at{rec.config.t_end};
    try {
        rec.fragments = fock::fragment_analysis(rec.config, rec.polarization, at);
    } catch (const PeaksUnresolved& e) {
        rec.fragment_status = e.name();
    }
    return io::to_table(rec);
}

io::Table command_compare(const Params& p) {
    floquet::FloquetParams fp;
    fp.mu = p.number("mu", 0.1);
    fp.delta = p.number("delta", 0.0);
    const auto sol = floquet::solve_floquet(fp);
    const double n_bar = p.number("nbar", 100.0);
    if (!(n_bar > 0.0 && n_bar <= 1e4)) throw ValidationError("--nbar must lie in (0, 1e4]");
    const auto packet = semiclassics::WavePacket::coherent(1.0 / n_bar);
    packet.validate();
    const double tc = safe_collapse_time(sol, packet);

    const auto cfg = fock_config(p, std::isfinite(tc) ? 2.0 * tc : 200.0);
    const auto quantum = fock::evolve(cfg, Vec3::UnitZ());
    const auto semi = semiclassics::polarization_trace(sol, packet, quantum.times);

    io::CompareRecord rec;
    rec.mu = fp.mu;
    rec.delta = fp.delta;
    rec.n_bar = n_bar;
    rec.cutoff = cfg.cutoff;
    rec.collapse_time = tc;
    rec.times = quantum.times;
    rec.semiclassical = semi.s_expectation;
    rec.quantum = quantum.sigma_expectations;
    rec.purity_semiclassical = semi.purity;
    rec.purity_quantum = quantum.purity;
    return io::to_table(rec);
}

std::string json_value_text(const nlohmann::json& v, const std::string& key) {
    if (v.is_number()) return io::format_double(v.get<double>());
    if (v.is_string()) return v.get<std::string>();
    if (v.is_array()) {
        std::string s;
        for (const auto& item : v) {
            if (!s.empty()) s += ",";
            if (item.is_array() || item.is_object()) throw ValidationError("config key '" + key + "': nested arrays are not allowed");
            s += json_value_text(item, key);
        }
        return s;
    }
    throw ValidationError("config key '" + key + "': unsupported value type");
}

}  // namespace

const std::vector<std::string>& allowed_keys(const std::string& command) {
    const auto it = command_keys().find(command);
    if (it == command_keys().end()) throw ValidationError("unknown command '" + command + "'");
    return it->second;
}

RunConfig parse_arguments(const std::vector<std::string>& args) {
    CLI::App app{"rabi_lab: driven-qubit Floquet analysis, resonance finder and Fock-space oracle"};
    app.require_subcommand(1);
    std::map<std::string, std::map<std::string, std::string>> flags;
    std::map<std::string, std::string> config_path, out_path;
    for (const auto& [name, keys] : command_keys()) {
        auto* sub = app.add_subcommand(name, command_help().at(name));
        for (const auto& key : keys) sub->add_option("--" + key, flags[name][key], key_help().at(key));
        sub->add_option("--config", config_path[name], "flat JSON config file");
        sub->add_option("--out", out_path[name], "output CSV path (sidecar: <out>.json)");
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        const auto subs = app.get_subcommands();
        throw HelpRequested{subs.empty() ? app.help() : subs.front()->help()};
    } catch (const CLI::ParseError& e) {
        throw ValidationError(e.what());
    }

    RunConfig rc;
    CLI::App* chosen = app.get_subcommands().front();
    rc.command = chosen->get_name();
    const auto& keys = allowed_keys(rc.command);

    if (!config_path[rc.command].empty()) {
        std::ifstream is(config_path[rc.command]);
        if (!is) throw ValidationError("cannot open config file '" + config_path[rc.command] + "'");
        nlohmann::json j;
        try {
            is >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(std::string("config file is not valid JSON: ") + e.what());
        }
        if (!j.is_object()) throw ValidationError("config file must hold a flat JSON object");
        for (const auto& [key, value] : j.items()) {
            if (key == "out") {
                rc.output_path = json_value_text(value, key);
                continue;
            }
            if (std::find(keys.begin(), keys.end(), key) == keys.end())
                throw ValidationError("unknown config key '" + key + "' for command " + rc.command);
            rc.parameters[key] = json_value_text(value, key);
        }
    }
    for (const auto& key : keys)
        if (chosen->get_option("--" + key)->count() > 0) rc.parameters[key] = flags[rc.command][key];
    if (chosen->get_option("--out")->count() > 0) rc.output_path = out_path[rc.command];
    return rc;
}

void run(const RunConfig& rc, std::ostream& out) {
    const auto& keys = allowed_keys(rc.command);
    for (const auto& [key, value] : rc.parameters)
        if (std::find(keys.begin(), keys.end(), key) == keys.end())
            throw ValidationError("unknown parameter '" + key + "' for command " + rc.command);
    const Params p(rc.parameters);

    io::Table table;
    if (rc.command == "floquet") table = command_floquet(p);
    else if (rc.command == "resonances") table = command_resonances(p);
    else if (rc.command == "curves") table = command_curves(p);
    else if (rc.command == "dynamics") table = command_dynamics(p);
    else if (rc.command == "oracle") table = command_oracle(p);
    else table = command_compare(p);

    // record every parameter that was set, then the command itself
    io::Table stamped;
    stamped.add_meta("command", rc.command);
    for (const auto& [key, value] : rc.parameters) stamped.add_meta("param_" + key, value);
    for (auto& m : table.metadata) stamped.metadata.push_back(std::move(m));
    stamped.columns = std::move(table.columns);
    stamped.rows = std::move(table.rows);

    if (rc.output_path.empty()) {
        io::write_csv(out, stamped);
        return;
    }
    io::write_csv_file(rc.output_path, stamped);
    std::ofstream js(rc.output_path + ".json", std::ios::binary);
    if (!js) throw ValidationError("cannot write sidecar '" + rc.output_path + ".json'");
    js << io::json_sidecar(stamped, rc.command);
}

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        run(parse_arguments(args), out);
        return 0;
    } catch (const HelpRequested& h) {
        out << h.text;
        return 0;
    } catch (const ValidationError& e) {
        err << "error: " << e.name() << ": " << e.what() << '\n';
        return 1;
    } catch (const Error& e) {
        err << "error: " << e.name() << ": " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: InternalError: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace rabi::cli
