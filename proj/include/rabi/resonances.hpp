// resonances.hpp: the seven resonance criteria of a qubit driven by a highly
// excited field mode, and the machinery to locate them in the detuning.
//
// Each criterion is a scalar function of (mu, delta) built from the Floquet
// solution. Minimum kinds (BS, TC, FC, EN, VS) are located by presampling
// the bracket and refining with Brent's method; root kinds (RC, WS) by
// TOMS 748 on a sign-changing sub-interval.

#pragma once

#include "rabi/floquet.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rabi::resonance {

enum class ResonanceKind { BS, TC, FC, RC, EN, VS, WS };

inline constexpr std::array<ResonanceKind, 7> all_kinds{ResonanceKind::BS, ResonanceKind::TC, ResonanceKind::FC,
                                                        ResonanceKind::RC, ResonanceKind::EN, ResonanceKind::VS,
                                                        ResonanceKind::WS};

std::string_view to_string(ResonanceKind kind);
ResonanceKind kind_from_string(std::string_view name);  // case-insensitive; throws ValidationError
bool is_root_kind(ResonanceKind kind);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct ResonanceResult {
    ResonanceKind kind = ResonanceKind::BS;
    double mu = 0.0;
    double delta_res = 0.0;
    double value_at_res = 0.0;
    Interval bracket;
    int objective_evaluations = 0;
};

struct SeriesFit {
    ResonanceKind kind = ResonanceKind::BS;
    std::vector<double> mu_grid;
    std::vector<double> delta_values;
    double c = 0.0;   // mu^2 coefficient
    double c3 = 0.0;  // mu^3 coefficient
    double c4 = 0.0;  // mu^4 coefficient
    double fit_residual = 0.0;  // max |delta - fit|
};

// Number of uniform samples used for period averages and maxima.
inline constexpr int period_samples = 256;

// d Omega / d mu by central differences, h = max(1e-4, 1e-3 mu), with one
// Richardson step. Throws DerivativeFailure if a perturbed solve fails.
double rabi_frequency_mu_derivative(const floquet::FloquetParams& params);

// Splitting-speed factor 2 |rt_{0,1,1}| ||r0^{-1}_0||, which is |v| in units
// of eps mu / |zeta|.
double splitting_speed_factor(const floquet::FloquetSolution& sol);

// Mean square long-time polarization for initial polarization p, averaged
// over the field phase at which the packet is launched: the average over one
// period of (r_0(t) . p)^2 / |r_0(t)|^2.
double phase_averaged_polarization(const floquet::FloquetSolution& sol, const floquet::Vec3& p);

// Scalar whose minimum (BS, TC, FC, EN, VS) or root (RC, WS) defines the resonance.
double objective(ResonanceKind kind, const floquet::FloquetParams& params);

// Characteristic value reported at the resonance (Omega for BS, t_c / t_c,RWA
// for TC, residual max|Q33| for FC, residual |avg Q33| for RC, mean square
// polarization for EN, speed factor for VS, residual |n3| for WS).
double characteristic_value(ResonanceKind kind, const floquet::FloquetParams& params);

// Default bracket is 2 [-mu^2, mu^2]; it is widened once by 4x when the
// extremum or sign change is not inside. Throws NoBracket.
ResonanceResult find_resonance(ResonanceKind kind, double mu, std::optional<Interval> bracket = std::nullopt,
                               int n_max = floquet::FloquetParams{}.n_max);

// Least-squares fit delta_res = c mu^2 + c3 mu^3 + c4 mu^4.
SeriesFit fit_shift_coefficient(ResonanceKind kind, std::span<const double> mu_grid);

struct CurvePoint {
    ResonanceKind kind = ResonanceKind::BS;
    double mu = 0.0;
    bool ok = false;
    std::string error;  // error name when !ok
    double delta_res = 0.0;
    double value_at_res = 0.0;
    double rabi_ratio = 0.0;          // Omega / mu at delta_res
    double speed_ratio = 0.0;         // |v| |zeta| / (eps mu) at delta_res
    double collapse_ratio = 0.0;      // t_c / t_c,RWA at delta_res
    double mean_square_polarization = 0.0;  // phase-averaged, p = e3
};

// One point per (kind, mu); per-point failures are recorded, not thrown.
std::vector<CurvePoint> resonance_curves(std::span<const ResonanceKind> kinds, std::span<const double> mu_grid);

}  // namespace rabi::resonance
