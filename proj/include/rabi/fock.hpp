// fock.hpp: exact evolution of the quantum Rabi model in a truncated Fock basis.
//
//     H = omega (a^dag a + 1/2) + (nu/2) sigma_3 + g (a + a^dag) sigma_1
//
// Basis states |n, q> are stored at index 2n + q, q = 0 for sigma_3 = +1.
// The coupling follows from the classical drive amplitude: the field
// operator a + a^dag ~ 2 sqrt(n_bar) cos(omega t) turns g (a + a^dag) sigma_1
// into mu cos(omega t) sigma_1 when g = mu / (2 sqrt(n_bar)).

#pragma once

#include "rabi/floquet.hpp"

#include <Eigen/Sparse>

#include <array>
#include <complex>
#include <span>
#include <vector>

namespace rabi::fock {

using floquet::cplx;
using floquet::Vec3;

enum class Propagator { Auto, Dense, Krylov };

struct FockConfig {
    double n_bar = 100.0;
    int cutoff = 260;  // number of Fock levels, n = 0 .. cutoff - 1
    double mu = 0.1;
    double delta = 0.0;
    double omega = 1.0;
    double dt = 0.5;
    double t_end = 100.0;
    Propagator propagator = Propagator::Auto;

    double g() const { return mu / (2.0 * std::sqrt(n_bar)); }
    double nu() const { return omega + delta; }
    Eigen::Index dimension() const { return 2 * static_cast<Eigen::Index>(cutoff); }

    // Throws ValidationError; requires cutoff >= n_bar + 12 sqrt(n_bar).
    void validate() const;
};

Eigen::SparseMatrix<double> build_hamiltonian(const FockConfig& config);

struct CoherentState {
    Eigen::VectorXcd amplitudes;  // renormalized over the cutoff
    double tail_mass = 0.0;       // probability beyond the cutoff before renormalization
};

CoherentState coherent_state(cplx alpha, int cutoff);

// Product state |alpha> (x) |p>, alpha = sqrt(n_bar).
Eigen::VectorXcd initial_state(const FockConfig& config, const Vec3& p);

struct QuantumTrace {
    std::vector<double> times;
    std::vector<Vec3> sigma_expectations;
    std::vector<double> purity;
    std::vector<cplx> field_mean;    // <a>
    std::vector<double> photon_mean;  // <a^dag a>
    double norm_drift = 0.0;          // max | <psi|psi> - 1 |
    double top_occupation = 0.0;      // max probability in the highest Fock level
    double energy_drift = 0.0;        // max relative change of <H>
    double tail_mass = 0.0;           // of the initial coherent state
};

// Samples at t = 0, dt, 2 dt, ... up to t_end. Throws CutoffReflection when
// norm drift exceeds 1e-8 or the top level is occupied above 1e-6.
QuantumTrace evolve(const FockConfig& config, const Vec3& p);

// State vectors at the requested times (same propagator as evolve).
std::vector<Eigen::VectorXcd> evolve_states(const FockConfig& config, const Vec3& p, std::span<const double> times);

struct HusimiGrid {
    int points = 161;         // per axis
    double half_width = 8.0;  // in vacuum widths
};

struct FragmentAnalysis {
    std::vector<double> times;
    // Rotating-frame centroids (a-units, unwound by e^{i omega t}).
    std::vector<std::array<cplx, 2>> peak_centers;
    std::vector<std::array<double, 2>> peak_weights;
    std::vector<double> separation;
};

// Husimi function Q(beta) = (1/pi) sum_q |<beta|psi_q>|^2 of the reduced field
// state on a square grid centred at `center`.
Eigen::MatrixXd husimi(const Eigen::VectorXcd& state, int cutoff, cplx center, const HusimiGrid& grid);

// Throws PeaksUnresolved when fewer than two peaks are found or they are
// closer than three vacuum widths.
FragmentAnalysis fragment_analysis(const FockConfig& config, const Vec3& p, std::span<const double> times,
                                   const HusimiGrid& grid = {});

}  // namespace rabi::fock
