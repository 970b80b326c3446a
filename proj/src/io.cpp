#include "rabi/io.hpp"

#include "rabi/errors.hpp"

#include "json.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace rabi::io {

using floquet::cplx;
using floquet::Vec3;

// ---- Table ---------------------------------------------------------------

void Table::add_meta(std::string key, std::string value) {
    if (key.find_first_of(":\n") != std::string::npos || value.find('\n') != std::string::npos)
        throw ValidationError("metadata may not contain newlines or ':' in keys");
    metadata.emplace_back(std::move(key), std::move(value));
}

void Table::add_meta(std::string key, double value) { add_meta(std::move(key), format_double(value)); }

bool Table::has_meta(const std::string& key) const {
    for (const auto& [k, v] : metadata)
        if (k == key) return true;
    return false;
}

const std::string& Table::meta(const std::string& key) const {
    for (const auto& [k, v] : metadata)
        if (k == key) return v;
    throw ValidationError("missing metadata key '" + key + "'");
}

double Table::meta_double(const std::string& key) const { return parse_double(meta(key)); }

std::size_t Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    throw ValidationError("missing column '" + name + "'");
}

double Table::cell(std::size_t row, const std::string& name) const { return parse_double(text(row, name)); }

const std::string& Table::text(std::size_t row, const std::string& name) const {
    return rows.at(row).at(column(name));
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double parse_double(const std::string& s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || (errno == ERANGE && std::isinf(v)))
        throw ValidationError("not a number: '" + s + "'");
    return v;
}

// ---- CSV -----------------------------------------------------------------

namespace {

void check_cell(const std::string& c) {
    if (c.find_first_of(",\n\r") != std::string::npos) throw ValidationError("CSV cell contains a separator: '" + c + "'");
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

std::string fmt(double x) { return format_double(x); }
std::string fmt(int x) { return std::to_string(x); }

int parse_int(const std::string& s) {
    const double v = parse_double(s);
    if (v != std::floor(v) || std::abs(v) > 2e9) throw ValidationError("not an integer: '" + s + "'");
    return static_cast<int>(v);
}

}  // namespace

void write_csv(std::ostream& os, const Table& t) {
    for (const auto& [k, v] : t.metadata) os << "# " << k << ": " << v << '\n';
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
        check_cell(t.columns[i]);
        os << (i ? "," : "") << t.columns[i];
    }
    os << '\n';
    for (const auto& row : t.rows) {
        if (row.size() != t.columns.size()) throw ValidationError("row width does not match header");
        for (std::size_t i = 0; i < row.size(); ++i) {
            check_cell(row[i]);
            os << (i ? "," : "") << row[i];
        }
        os << '\n';
    }
}

Table read_csv(std::istream& is) {
    Table t;
    std::string line;
    bool header = false;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!header && line.rfind("# ", 0) == 0) {
            const auto colon = line.find(": ", 2);
            if (colon == std::string::npos) throw ValidationError("malformed metadata line: " + line);
            t.metadata.emplace_back(line.substr(2, colon - 2), line.substr(colon + 2));
            continue;
        }
        if (line.empty()) continue;
        if (!header) {
            t.columns = split(line);
            header = true;
            continue;
        }
        auto row = split(line);
        if (row.size() != t.columns.size()) throw ValidationError("row width does not match header: " + line);
        t.rows.push_back(std::move(row));
    }
    if (!header) throw ValidationError("CSV has no header line");
    return t;
}

void write_csv_file(const std::string& path, const Table& table) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ValidationError("cannot open '" + path + "' for writing");
    write_csv(os, table);
    if (!os) throw ValidationError("write to '" + path + "' failed");
}

Table read_csv_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ValidationError("cannot open '" + path + "'");
    return read_csv(is);
}

std::string json_sidecar(const Table& t, const std::string& command) {
    nlohmann::ordered_json meta = nlohmann::ordered_json::object();
    for (const auto& [k, v] : t.metadata) {
        try {
            const double x = parse_double(v);
            if (std::isfinite(x)) meta[k] = x;
            else meta[k] = v;
        } catch (const ValidationError&) {
            meta[k] = v;
        }
    }
    nlohmann::ordered_json j;
    j["command"] = command;
    j["tool_version"] = tool_version;
    j["metadata"] = meta;
    j["columns"] = t.columns;
    j["rows"] = t.rows.size();
    return j.dump(2) + "\n";
}

// ---- floquet -------------------------------------------------------------

FloquetRecord floquet_record(const floquet::FloquetSolution& sol) {
    FloquetRecord r;
    const auto& p = sol.params();
    r.mu = p.mu;
    r.delta = p.delta;
    r.omega = p.omega;
    r.n_max = p.n_max;
    r.rabi_frequency = sol.rabi_frequency();
    r.condition_number = sol.condition_number();
    r.convergence_gap = sol.convergence_gap();
    for (int k = -1; k <= 1; ++k)
        for (int n = -p.n_max; n <= p.n_max; ++n) {
            r.k.push_back(k);
            r.n.push_back(n);
            r.coefficients.emplace_back(sol.fourier(k, n, 1), sol.fourier(k, n, 2), sol.fourier(k, n, 3));
        }
    return r;
}

Table to_table(const FloquetRecord& r) {
    Table t;
    t.add_meta("tool_version", tool_version);
    t.add_meta("record", "floquet");
    t.add_meta("mu", r.mu);
    t.add_meta("delta", r.delta);
    t.add_meta("omega", r.omega);
    t.add_meta("n_max", std::to_string(r.n_max));
    t.add_meta("condition_number", r.condition_number);
    t.add_meta("convergence_gap", r.convergence_gap);
    t.columns = {"k", "n", "Omega", "re_r1", "im_r1", "re_r2", "im_r2", "re_r3", "im_r3"};
    for (std::size_t i = 0; i < r.k.size(); ++i) {
        std::vector<std::string> row{fmt(r.k[i]), fmt(r.n[i]), fmt(r.rabi_frequency)};
        for (int a = 0; a < 3; ++a) {
            row.push_back(fmt(r.coefficients[i](a).real()));
            row.push_back(fmt(r.coefficients[i](a).imag()));
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

FloquetRecord floquet_from_table(const Table& t) {
    FloquetRecord r;
    r.mu = t.meta_double("mu");
    r.delta = t.meta_double("delta");
    r.omega = t.meta_double("omega");
    r.n_max = parse_int(t.meta("n_max"));
    r.condition_number = t.meta_double("condition_number");
    r.convergence_gap = t.meta_double("convergence_gap");
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        r.k.push_back(parse_int(t.text(i, "k")));
        r.n.push_back(parse_int(t.text(i, "n")));
        r.rabi_frequency = t.cell(i, "Omega");
        floquet::CVec3 c;
        for (int a = 1; a <= 3; ++a)
            c(a - 1) = cplx{t.cell(i, "re_r" + std::to_string(a)), t.cell(i, "im_r" + std::to_string(a))};
        r.coefficients.push_back(c);
    }
    return r;
}

// ---- resonances ----------------------------------------------------------

Table to_table(const std::vector<resonance::ResonanceResult>& results) {
    Table t;
    t.add_meta("tool_version", tool_version);
    t.add_meta("record", "resonances");
    t.columns = {"kind", "mu", "delta_res", "value_at_res", "bracket_lo", "bracket_hi", "objective_evaluations"};
    for (const auto& r : results)
        t.rows.push_back({std::string(resonance::to_string(r.kind)), fmt(r.mu), fmt(r.delta_res), fmt(r.value_at_res),
                          fmt(r.bracket.lo), fmt(r.bracket.hi), fmt(r.objective_evaluations)});
    return t;
}

std::vector<resonance::ResonanceResult> resonances_from_table(const Table& t) {
    std::vector<resonance::ResonanceResult> out;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        resonance::ResonanceResult r;
        r.kind = resonance::kind_from_string(t.text(i, "kind"));
        r.mu = t.cell(i, "mu");
        r.delta_res = t.cell(i, "delta_res");
        r.value_at_res = t.cell(i, "value_at_res");
        r.bracket = {t.cell(i, "bracket_lo"), t.cell(i, "bracket_hi")};
        r.objective_evaluations = parse_int(t.text(i, "objective_evaluations"));
        out.push_back(r);
    }
    return out;
}

Table to_table(const std::vector<resonance::CurvePoint>& points) {
    Table t;
    t.add_meta("tool_version", tool_version);
    t.add_meta("record", "curves");
    t.columns = {"kind", "mu", "status", "delta_res", "value_at_res", "rabi_ratio",
                 "speed_ratio", "collapse_ratio", "mean_square_polarization"};
    for (const auto& p : points)
        t.rows.push_back({std::string(resonance::to_string(p.kind)), fmt(p.mu), p.ok ? "ok" : p.error,
                          fmt(p.delta_res), fmt(p.value_at_res), fmt(p.rabi_ratio), fmt(p.speed_ratio),
                          fmt(p.collapse_ratio), fmt(p.mean_square_polarization)});
    return t;
}

std::vector<resonance::CurvePoint> curves_from_table(const Table& t) {
    std::vector<resonance::CurvePoint> out;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        resonance::CurvePoint p;
        p.kind = resonance::kind_from_string(t.text(i, "kind"));
        p.mu = t.cell(i, "mu");
        const auto& status = t.text(i, "status");
        p.ok = status == "ok";
        if (!p.ok) p.error = status;
        p.delta_res = t.cell(i, "delta_res");
        p.value_at_res = t.cell(i, "value_at_res");
        p.rabi_ratio = t.cell(i, "rabi_ratio");
        p.speed_ratio = t.cell(i, "speed_ratio");
        p.collapse_ratio = t.cell(i, "collapse_ratio");
        p.mean_square_polarization = t.cell(i, "mean_square_polarization");
        out.push_back(p);
    }
    return out;
}

// ---- dynamics ------------------------------------------------------------

namespace {

void add_vec(Table& t, const std::string& key, const Vec3& v) {
    for (int a = 0; a < 3; ++a) t.add_meta(key + "_" + std::to_string(a + 1), v(a));
}

Vec3 get_vec(const Table& t, const std::string& key) {
    Vec3 v;
    for (int a = 0; a < 3; ++a) v(a) = t.meta_double(key + "_" + std::to_string(a + 1));
    return v;
}

void add_cplx(Table& t, const std::string& key, cplx z) {
    t.add_meta(key + "_re", z.real());
    t.add_meta(key + "_im", z.imag());
}

cplx get_cplx(const Table& t, const std::string& key) {
    return {t.meta_double(key + "_re"), t.meta_double(key + "_im")};
}

}  // namespace

Table to_table(const DynamicsRecord& r) {
    Table t;
    t.add_meta("tool_version", tool_version);
    t.add_meta("record", "dynamics");
    t.add_meta("mu", r.mu);
    t.add_meta("delta", r.delta);
    add_cplx(t, "zeta_bar", r.packet.zeta_bar);
    t.add_meta("epsilon", r.packet.epsilon);
    t.add_meta("radial_sigma", r.packet.radial_sigma);
    add_vec(t, "polarization", r.packet.polarization);
    t.add_meta("collapse_time", r.collapse_time);
    add_cplx(t, "velocity", r.split.velocity);
    add_vec(t, "direction", r.split.direction);
    t.add_meta("weight_plus", r.split.weights.first);
    t.add_meta("weight_minus", r.split.weights.second);
    t.add_meta("omega", r.split.omega);
    t.columns = {"t", "s1", "s2", "s3", "envelope", "purity"};
    const auto& tr = r.trace;
    for (std::size_t i = 0; i < tr.times.size(); ++i)
        t.rows.push_back({fmt(tr.times[i]), fmt(tr.s_expectation[i](0)), fmt(tr.s_expectation[i](1)),
                          fmt(tr.s_expectation[i](2)), fmt(tr.envelope[i]), fmt(tr.purity[i])});
    return t;
}

DynamicsRecord dynamics_from_table(const Table& t) {
    DynamicsRecord r;
    r.mu = t.meta_double("mu");
    r.delta = t.meta_double("delta");
    r.packet.zeta_bar = get_cplx(t, "zeta_bar");
    r.packet.epsilon = t.meta_double("epsilon");
    r.packet.radial_sigma = t.meta_double("radial_sigma");
    r.packet.polarization = get_vec(t, "polarization");
    r.collapse_time = t.meta_double("collapse_time");
    r.split.velocity = get_cplx(t, "velocity");
    r.split.direction = get_vec(t, "direction");
    r.split.weights = {t.meta_double("weight_plus"), t.meta_double("weight_minus")};
    r.split.zeta_bar = r.packet.zeta_bar;
    r.split.omega = t.meta_double("omega");
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        r.trace.times.push_back(t.cell(i, "t"));
        r.trace.s_expectation.emplace_back(t.cell(i, "s1"), t.cell(i, "s2"), t.cell(i, "s3"));
        r.trace.envelope.push_back(t.cell(i, "envelope"));
        r.trace.purity.push_back(t.cell(i, "purity"));
    }
    return r;
}

// ---- oracle --------------------------------------------------------------

namespace {

std::string propagator_name(fock::Propagator p) {
    switch (p) {
        case fock::Propagator::Dense: return "dense";
        case fock::Propagator::Krylov: return "krylov";
        case fock::Propagator::Auto: break;
    }
    return "auto";
}

fock::Propagator propagator_from(const std::string& s) {
    if (s == "dense") return fock::Propagator::Dense;
    if (s == "krylov") return fock::Propagator::Krylov;
    if (s == "auto") return fock::Propagator::Auto;
    throw ValidationError("unknown propagator '" + s + "'");
}

}  // namespace

Table to_table(const OracleRecord& r) {
    Table t;
    t.add_meta("tool_version", tool_version);
    t.add_meta("record", "oracle");
    const auto& c = r.config;
    t.add_meta("n_bar", c.n_bar);
    t.add_meta("cutoff", std::to_string(c.cutoff));
    t.add_meta("mu", c.mu);
    t.add_meta("delta", c.delta);
    t.add_meta("omega", c.omega);
    t.add_meta("g", c.g());
    t.add_meta("dt", c.dt);
    t.add_meta("t_end", c.t_end);
    t.add_meta("propagator", propagator_name(c.propagator));
    add_vec(t, "polarization", r.polarization);
    t.add_meta("norm_drift", r.trace.norm_drift);
    t.add_meta("top_occupation", r.trace.top_occupation);
    t.add_meta("energy_drift", r.trace.energy_drift);
    t.add_meta("tail_mass", r.trace.tail_mass);
    t.add_meta("fragment_status", r.fragment_status);
    t.add_meta("fragment_count", std::to_string(r.fragments.times.size()));
    for (std::size_t i = 0; i < r.fragments.times.size(); ++i) {
        const std::string k = "fragment_" + std::to_string(i) + "_";
        t.add_meta(k + "t", r.fragments.times[i]);
        add_cplx(t, k + "center_plus", r.fragments.peak_centers[i][0]);
        add_cplx(t, k + "center_minus", r.fragments.peak_centers[i][1]);
        t.add_meta(k + "weight_plus", r.fragments.peak_weights[i][0]);
        t.add_meta(k + "weight_minus", r.fragments.peak_weights[i][1]);
        t.add_meta(k + "separation", r.fragments.separation[i]);
    }
    t.columns = {"t", "sigma1", "sigma2", "sigma3", "purity", "re_a", "im_a", "photons"};
    const auto& tr = r.trace;
    for (std::size_t i = 0; i < tr.times.size(); ++i)
        t.rows.push_back({fmt(tr.times[i]), fmt(tr.sigma_expectations[i](0)), fmt(tr.sigma_expectations[i](1)),
                          fmt(tr.sigma_expectations[i](2)), fmt(tr.purity[i]), fmt(tr.field_mean[i].real()),
                          fmt(tr.field_mean[i].imag()), fmt(tr.photon_mean[i])});
    return t;
}

OracleRecord oracle_from_table(const Table& t) {
    OracleRecord r;
    auto& c = r.config;
    c.n_bar = t.meta_double("n_bar");
    c.cutoff = parse_int(t.meta("cutoff"));
    c.mu = t.meta_double("mu");
    c.delta = t.meta_double("delta");
    c.omega = t.meta_double("omega");
    c.dt = t.meta_double("dt");
    c.t_end = t.meta_double("t_end");
    c.propagator = propagator_from(t.meta("propagator"));
    r.polarization = get_vec(t, "polarization");
    r.trace.norm_drift = t.meta_double("norm_drift");
    r.trace.top_occupation = t.meta_double("top_occupation");
    r.trace.energy_drift = t.meta_double("energy_drift");
    r.trace.tail_mass = t.meta_double("tail_mass");
    r.fragment_status = t.meta("fragment_status");
    const int nf = parse_int(t.meta("fragment_count"));
    for (int i = 0; i < nf; ++i) {
        const std::string k = "fragment_" + std::to_string(i) + "_";
        r.fragments.times.push_back(t.meta_double(k + "t"));
        r.fragments.peak_centers.push_back({get_cplx(t, k + "center_plus"), get_cplx(t, k + "center_minus")});
        r.fragments.peak_weights.push_back({t.meta_double(k + "weight_plus"), t.meta_double(k + "weight_minus")});
        r.fragments.separation.push_back(t.meta_double(k + "separation"));
    }
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        r.trace.times.push_back(t.cell(i, "t"));
        r.trace.sigma_expectations.emplace_back(t.cell(i, "sigma1"), t.cell(i, "sigma2"), t.cell(i, "sigma3"));
        r.trace.purity.push_back(t.cell(i, "purity"));
        r.trace.field_mean.emplace_back(t.cell(i, "re_a"), t.cell(i, "im_a"));
        r.trace.photon_mean.push_back(t.cell(i, "photons"));
    }
    return r;
}

// ---- compare -------------------------------------------------------------

double CompareRecord::max_sigma3_deviation() const {
    double m = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) m = std::max(m, std::abs(quantum[i](2) - semiclassical[i](2)));
    return m;
}

Table to_table(const CompareRecord& r) {
    Table t;
    t.add_meta("tool_version", tool_version);
    t.add_meta("record", "compare");
    t.add_meta("mu", r.mu);
    t.add_meta("delta", r.delta);
    t.add_meta("n_bar", r.n_bar);
    t.add_meta("cutoff", std::to_string(r.cutoff));
    t.add_meta("collapse_time", r.collapse_time);
    t.add_meta("max_abs_d_sigma3", r.max_sigma3_deviation());
    t.columns = {"t", "sc_s1", "sc_s2", "sc_s3", "q_s1", "q_s2", "q_s3", "d_s1", "d_s2", "d_s3",
                 "max_abs_d_sigma3", "sc_purity", "q_purity", "d_purity"};
    double running = 0.0;
    for (std::size_t i = 0; i < r.times.size(); ++i) {
        const Vec3 d = r.quantum[i] - r.semiclassical[i];
        running = std::max(running, std::abs(d(2)));
        std::vector<std::string> row{fmt(r.times[i])};
        for (int a = 0; a < 3; ++a) row.push_back(fmt(r.semiclassical[i](a)));
        for (int a = 0; a < 3; ++a) row.push_back(fmt(r.quantum[i](a)));
        for (int a = 0; a < 3; ++a) row.push_back(fmt(d(a)));
        row.push_back(fmt(running));
        row.push_back(fmt(r.purity_semiclassical[i]));
        row.push_back(fmt(r.purity_quantum[i]));
        row.push_back(fmt(r.purity_quantum[i] - r.purity_semiclassical[i]));
        t.rows.push_back(std::move(row));
    }
    return t;
}

CompareRecord compare_from_table(const Table& t) {
    CompareRecord r;
    r.mu = t.meta_double("mu");
    r.delta = t.meta_double("delta");
    r.n_bar = t.meta_double("n_bar");
    r.cutoff = parse_int(t.meta("cutoff"));
    r.collapse_time = t.meta_double("collapse_time");
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        r.times.push_back(t.cell(i, "t"));
        r.semiclassical.emplace_back(t.cell(i, "sc_s1"), t.cell(i, "sc_s2"), t.cell(i, "sc_s3"));
        r.quantum.emplace_back(t.cell(i, "q_s1"), t.cell(i, "q_s2"), t.cell(i, "q_s3"));
        r.purity_semiclassical.push_back(t.cell(i, "sc_purity"));
        r.purity_quantum.push_back(t.cell(i, "q_purity"));
    }
    return r;
}

}  // namespace rabi::io
