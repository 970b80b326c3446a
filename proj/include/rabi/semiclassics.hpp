// semiclassics.hpp: wave-packet observables from the Floquet flow.
//
// A highly excited field packet centred at zeta (scaled amplitude, field
// operator a = Z / sqrt(eps)) dephases the Rabi modes k = +-1 through the
// spread of |zeta|, collapsing the Rabi oscillations on t ~ eps^{-1/2}, and
// at subleading order splits into two fragments drifting with velocities +-v.
//
// All times are measured from the moment the packet is launched, at which
// the classical drive mu cos(omega t_phi) is at its maximum (t_phi = 0); the
// field phase phi = arg zeta enters only through the drift velocity.

#pragma once

#include "rabi/floquet.hpp"

#include <complex>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace rabi::semiclassics {

using floquet::cplx;
using floquet::FloquetSolution;
using floquet::Vec3;

struct WavePacket {
    cplx zeta_bar{1.0, 0.0};
    double epsilon = 0.01;
    double radial_sigma = 0.05;  // sqrt(eps)/2 for a coherent state
    Vec3 polarization = Vec3::UnitZ();
    // Fourier transform of the radial distribution w(x); Gaussian of width
    // radial_sigma when empty.
    std::function<cplx(double)> radial_transform;

    double phi() const { return std::arg(zeta_bar); }
    cplx transform(double s) const;

    // Throws ValidationError unless |p| = 1, eps in (0, 0.1], sigma > 0, zeta != 0.
    void validate() const;

    static WavePacket coherent(double epsilon, Vec3 polarization = Vec3::UnitZ(), cplx zeta_bar = {1.0, 0.0});
};

struct PolarizationTrace {
    std::vector<double> times;
    std::vector<Vec3> s_expectation;
    std::vector<double> envelope;
    std::vector<double> purity;
};

struct SplitReport {
    cplx velocity;
    Vec3 direction;
    std::pair<double, double> weights;  // ((1 + p.n)/2, (1 - p.n)/2)
    cplx zeta_bar;
    double omega = 1.0;

    // e^{-i omega t} (zeta_bar +- v t)
    std::pair<cplx, cplx> fragment_centers(double t) const;
};

// Scaled quasi-frequency slope dOmega/d|zeta| = (mu / |zeta|) dOmega/dmu.
double rabi_frequency_slope(const FloquetSolution& sol, const WavePacket& packet);

PolarizationTrace polarization_trace(const FloquetSolution& sol, const WavePacket& packet,
                                     std::span<const double> times);

// 1/e time of the Gaussian envelope, sqrt(2) / (sigma |dOmega/d|zeta||).
// Throws DegenerateCollapse when |dOmega/dmu| < 1e-10.
double collapse_time(const FloquetSolution& sol, const WavePacket& packet);

// v = -2 i eps (mu/|zeta|) e^{i phi} rt_{0,1,1} ||r0^{-1}_0||, n_b = r0^{-1}_{0b} / ||r0^{-1}_0||.
SplitReport splitting(const FloquetSolution& sol, const WavePacket& packet);

// First-order field symbol z^(1)_t = c . sigma, split into the secular part
// (growing linearly in t) and the bounded oscillatory remainder.
struct SubleadingSymbol {
    Eigen::Vector3cd secular;
    Eigen::Vector3cd bounded;

    Eigen::Matrix2cd matrix() const;
};

// Throws SmallDenominator if a contributing term has |k Omega - (n-1) omega| < 1e-6.
SubleadingSymbol subleading_symbol(const FloquetSolution& sol, const WavePacket& packet, double t);

}  // namespace rabi::semiclassics
