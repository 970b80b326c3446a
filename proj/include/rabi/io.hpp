// io.hpp: CSV tables with a '#' metadata block, JSON sidecars, and typed
// converters for every record the command-line tool writes.
//
// File layout:
//     # key: value          (one line per metadata entry, insertion order)
//     col_a,col_b,...       (header)
//     1.2345678901234567,…  (data, doubles printed with 17 significant digits)

#pragma once

#include "rabi/fock.hpp"
#include "rabi/floquet.hpp"
#include "rabi/resonances.hpp"
#include "rabi/semiclassics.hpp"

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace rabi::io {

inline constexpr const char* tool_version = "1.0.0";

struct Table {
    std::vector<std::pair<std::string, std::string>> metadata;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_meta(std::string key, std::string value);
    void add_meta(std::string key, double value);
    // Throws ValidationError when the key is absent.
    const std::string& meta(const std::string& key) const;
    double meta_double(const std::string& key) const;
    bool has_meta(const std::string& key) const;

    std::size_t column(const std::string& name) const;  // throws ValidationError
    double cell(std::size_t row, const std::string& name) const;
    const std::string& text(std::size_t row, const std::string& name) const;
};

std::string format_double(double x);  // %.17g, "nan"/"inf"/"-inf" for non-finite
double parse_double(const std::string& s);  // throws ValidationError

void write_csv(std::ostream& os, const Table& table);
Table read_csv(std::istream& is);
void write_csv_file(const std::string& path, const Table& table);
Table read_csv_file(const std::string& path);

// Machine-readable sidecar: metadata, columns and row count.
std::string json_sidecar(const Table& table, const std::string& command);

// Floquet summary: one row per (k, n) with the Fourier coefficients.
struct FloquetRecord {
    double mu = 0, delta = 0, omega = 1;
    int n_max = 0;
    double rabi_frequency = 0, condition_number = 0, convergence_gap = 0;
    std::vector<int> k, n;
    std::vector<floquet::CVec3> coefficients;
};
FloquetRecord floquet_record(const floquet::FloquetSolution& sol);
Table to_table(const FloquetRecord& rec);
FloquetRecord floquet_from_table(const Table& t);

Table to_table(const std::vector<resonance::ResonanceResult>& results);
std::vector<resonance::ResonanceResult> resonances_from_table(const Table& t);

Table to_table(const std::vector<resonance::CurvePoint>& points);
std::vector<resonance::CurvePoint> curves_from_table(const Table& t);

struct DynamicsRecord {
    double mu = 0, delta = 0;
    semiclassics::WavePacket packet;
    double collapse_time = 0;  // NaN when the collapse is degenerate
    semiclassics::PolarizationTrace trace;
    semiclassics::SplitReport split;
};
Table to_table(const DynamicsRecord& rec);
DynamicsRecord dynamics_from_table(const Table& t);

struct OracleRecord {
    fock::FockConfig config;
    floquet::Vec3 polarization = floquet::Vec3::UnitZ();
    fock::QuantumTrace trace;
    std::string fragment_status = "ok";  // or the error name
    fock::FragmentAnalysis fragments;    // empty unless status is "ok"
};
Table to_table(const OracleRecord& rec);
OracleRecord oracle_from_table(const Table& t);

// Aligned semiclassical and exact series on a common time grid.
struct CompareRecord {
    double mu = 0, delta = 0, n_bar = 0;
    int cutoff = 0;
    double collapse_time = 0;
    std::vector<double> times;
    std::vector<floquet::Vec3> semiclassical, quantum;
    std::vector<double> purity_semiclassical, purity_quantum;

    // max_t |quantum_3 - semiclassical_3|
    double max_sigma3_deviation() const;
};
Table to_table(const CompareRecord& rec);
CompareRecord compare_from_table(const Table& t);

}  // namespace rabi::io
