// floquet.hpp: Floquet analysis of qubit polarization precession in a
// classical monochromatic field.
//
// The polarization s obeys ds/dt = 2 h(t) ∧ s with
//     h(t) = (mu cos(omega t), 0, nu / 2),   nu = omega + delta,
// a rigid rotation with 2pi/omega-periodic coefficients. Its three
// fundamental solutions are exp(i Omega_k t) r_k(t), k = -1, 0, 1, with
// periodic r_k(t) = sum_n rt_{k,n} exp(-i n omega t). The Fourier coefficients
// solve an infinite block-tridiagonal eigenproblem that is truncated at
// |n| <= n_max and diagonalized here.

#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>

namespace rabi::floquet {

using cplx = std::complex<double>;
using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;
using CMat3 = Eigen::Matrix3cd;
using CVec3 = Eigen::Vector3cd;

struct FloquetParams {
    double omega = 1.0;  // field mode frequency; the lab works in units where omega = 1
    double delta = 0.0;  // detuning nu - omega
    double mu = 0.0;     // interaction frequency scale
    int n_max = 12;      // Fourier truncation order; 8 leaves O(t) off by ~1e-7 at mu = 0.5

    double nu() const { return omega + delta; }

    // Throws ValidationError on n_max < 1, mu < 0, omega <= 0 or nu <= 0.
    void validate() const;
};

// Truncated generator L of the Fourier-coefficient flow: i Omega rt = L rt.
// Rows and columns are indexed by (n, a), n in [-n_max, n_max], a in {1,2,3}.
struct TruncatedGenerator {
    int n_max = 0;
    Eigen::MatrixXcd matrix;

    Eigen::Index dimension() const { return matrix.rows(); }
    Eigen::Index index(int n, int a) const { return 3 * (n + n_max) + (a - 1); }
};

TruncatedGenerator build_generator(const FloquetParams& params);

struct SolveOptions {
    // NearZoneBoundary when |Omega| > omega/2 - zone_margin * omega.
    double zone_margin = 0.002;
    double max_condition = 1e8;
    double convergence_tol = 1e-8;
    // Bound on the anti-Hermitian defect of L, i.e. on |Re lambda|.
    double realness_tol = 1e-8;
    bool check_convergence = true;
};

class FloquetSolution {
public:
    const FloquetParams& params() const { return params_; }

    // Omega = Omega_1 = -Omega_{-1}, folded into (0, omega/2].
    double rabi_frequency() const { return rabi_frequency_; }
    double quasi_frequency(int k) const { return k * rabi_frequency_; }

    // rt_{k,na}; returns 0 outside the truncation window.
    cplx fourier(int k, int n, int a) const;
    // (2 n_max + 1) x 3 table, row n + n_max, column a - 1.
    const Eigen::MatrixXcd& fourier_table(int k) const { return tables_[k + 1]; }

    // Periodic part r_k(t).
    CVec3 mode(int k, double t) const;

    // Columns r_k(0) for k = -1, 0, 1 and the matching inverse (rows k).
    const CMat3& r0_matrix() const { return r0_; }
    const CMat3& r0_inverse() const { return r0_inv_; }
    double condition_number() const { return condition_; }
    double convergence_gap() const { return convergence_gap_; }

private:
    friend FloquetSolution solve_floquet(const FloquetParams&, const SolveOptions&);

    FloquetParams params_;
    double rabi_frequency_ = 0.0;
    std::array<Eigen::MatrixXcd, 3> tables_;
    CMat3 r0_ = CMat3::Zero();
    CMat3 r0_inv_ = CMat3::Zero();
    double condition_ = 0.0;
    double convergence_gap_ = 0.0;
};

// Diagonalizes the truncated generator and extracts the three physical modes.
//
// Conventions: r_0(0) is a real unit vector with positive 1-component
// (3-component when the 1-component vanishes); r_{+1}(0) is a unit vector
// whose 1-component (else 2-component) is real positive; r_{-1} is the
// independently computed eigenvector phase-aligned to conj(r_{+1}).
//
// Throws NearZoneBoundary, IllConditioned, NotConverged, SpectrumNotImaginary.
FloquetSolution solve_floquet(const FloquetParams& params, const SolveOptions& options = {});

// Rabi rotation O(t) = sum_k exp(i Omega_k t) r_k(t) r0^{-1}_k. Orthogonal.
Mat3 assemble_O(const FloquetSolution& sol, double t);

// Long-time (collapsed) propagator Q(t) = r_0(t) r0^{-1}_0. Rank one.
Mat3 assemble_Q(const FloquetSolution& sol, double t);

// Rotation generator of ds/dt = M(t) s for the field phase phi = 0.
Mat3 precession_generator(const FloquetParams& params, double t);

// Fundamental matrix of ds/dt = M(t) s from 0 to t_end by adaptive
// Runge-Kutta-Fehlberg 7(8) integration, split into `steps` segments.
// Independent of the Fourier route; used to cross-check it.
// Throws IntegratorFailure if the result drifts off the rotation group.
Mat3 monodromy_oracle(const FloquetParams& params, double t_end, int steps, double tol = 1e-13);

}  // namespace rabi::floquet
