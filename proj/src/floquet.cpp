#include "rabi/floquet.hpp"

#include "rabi/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace rabi::floquet {

namespace {

constexpr cplx I{0.0, 1.0};

std::string describe(const FloquetParams& p) {
    std::ostringstream os;
    os.precision(10);
    os << "(mu=" << p.mu << ", delta=" << p.delta << ", n_max=" << p.n_max << ")";
    return os.str();
}

// Block index operator N = diag(n) restricted to a pair of vectors.
Eigen::Matrix2cd block_index_form(const TruncatedGenerator& gen, const Eigen::VectorXcd& u,
                                  const Eigen::VectorXcd& v) {
    Eigen::VectorXd n_of(gen.dimension());
    for (int n = -gen.n_max; n <= gen.n_max; ++n)
        for (int a = 1; a <= 3; ++a) n_of(gen.index(n, a)) = n;
    const Eigen::VectorXcd nu_ = n_of.cast<cplx>().cwiseProduct(u);
    const Eigen::VectorXcd nv = n_of.cast<cplx>().cwiseProduct(v);
    Eigen::Matrix2cd m;
    m << u.dot(nu_), u.dot(nv), v.dot(nu_), v.dot(nv);
    return m;
}

Eigen::MatrixXcd as_table(const Eigen::VectorXcd& v, int n_max) {
    Eigen::MatrixXcd t(2 * n_max + 1, 3);
    for (int row = 0; row < 2 * n_max + 1; ++row)
        for (int a = 0; a < 3; ++a) t(row, a) = v(3 * row + a);
    return t;
}

CVec3 value_at_zero(const Eigen::MatrixXcd& table) { return table.colwise().sum().transpose(); }

}  // namespace

void FloquetParams::validate() const {
    if (n_max < 1) throw ValidationError("n_max must be >= 1");
    if (!(omega > 0.0)) throw ValidationError("omega must be positive");
    if (!(mu >= 0.0)) throw ValidationError("mu must be >= 0");
    if (!(nu() > 0.0)) throw ValidationError("qubit frequency omega + delta must be positive");
}

// Fourier expansion of ds/dt = M0 s + M1 (e^{iwt} + e^{-iwt}) s with
// r(t) = sum_n rt_n e^{-inwt} gives
//     i Omega rt_n = i n w rt_n + M0 rt_n + M1 (rt_{n+1} + rt_{n-1}).
TruncatedGenerator build_generator(const FloquetParams& params) {
    params.validate();
    TruncatedGenerator gen;
    gen.n_max = params.n_max;
    const Eigen::Index dim = 3 * (2 * params.n_max + 1);
    gen.matrix = Eigen::MatrixXcd::Zero(dim, dim);
    const double nu = params.nu();
    for (int n = -params.n_max; n <= params.n_max; ++n) {
        for (int a = 1; a <= 3; ++a) gen.matrix(gen.index(n, a), gen.index(n, a)) = I * (params.omega * n);
        gen.matrix(gen.index(n, 2), gen.index(n, 1)) = nu;
        gen.matrix(gen.index(n, 1), gen.index(n, 2)) = -nu;
        for (int m : {n - 1, n + 1}) {
            if (m < -params.n_max || m > params.n_max) continue;
            gen.matrix(gen.index(n, 3), gen.index(m, 2)) = params.mu;
            gen.matrix(gen.index(n, 2), gen.index(m, 3)) = -params.mu;
        }
    }
    return gen;
}

cplx FloquetSolution::fourier(int k, int n, int a) const {
    const int n_max = params_.n_max;
    if (k < -1 || k > 1 || a < 1 || a > 3) throw ValidationError("fourier: index out of range");
    if (n < -n_max || n > n_max) return {0.0, 0.0};
    return tables_[k + 1](n + n_max, a - 1);
}

CVec3 FloquetSolution::mode(int k, double t) const {
    const int n_max = params_.n_max;
    const Eigen::MatrixXcd& table = tables_[k + 1];
    CVec3 r = CVec3::Zero();
    const double w = params_.omega;
    for (int n = -n_max; n <= n_max; ++n)
        r += std::exp(-I * (n * w * t)) * table.row(n + n_max).transpose();
    return r;
}

FloquetSolution solve_floquet(const FloquetParams& params, const SolveOptions& options) {
    const TruncatedGenerator gen = build_generator(params);
    const double w = params.omega;

    // L = i H with H Hermitian exactly when L is anti-Hermitian, which is
    // what makes every eigenvalue purely imaginary.
    const Eigen::MatrixXcd& L = gen.matrix;
    const double defect = (L + L.adjoint()).cwiseAbs().maxCoeff();
    if (defect > options.realness_tol * w)
        throw SpectrumNotImaginary("generator is not anti-Hermitian " + describe(params));
    const Eigen::MatrixXcd H = (-I * L + (-I * L).adjoint()) * 0.5;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(H);
    if (eig.info() != Eigen::Success) throw NotConverged("eigensolver failed " + describe(params));
    const Eigen::VectorXd& lam = eig.eigenvalues();

    std::vector<Eigen::Index> central;
    for (Eigen::Index i = 0; i < lam.size(); ++i)
        if (lam(i) > -0.5 * w && lam(i) <= 0.5 * w) central.push_back(i);
    if (central.size() != 3)
        throw NearZoneBoundary("expected three quasi-frequencies in (-w/2, w/2] " + describe(params));
    std::sort(central.begin(), central.end(), [&](auto x, auto y) { return lam(x) < lam(y); });

    const double omega_rabi = 0.5 * (lam(central[2]) - lam(central[0]));
    if (omega_rabi > (0.5 - options.zone_margin) * w)
        throw NearZoneBoundary("Rabi frequency " + std::to_string(omega_rabi) + " too close to w/2 " +
                               describe(params));
    if (std::abs(lam(central[1])) > 1e-8 * w || std::abs(lam(central[0]) + lam(central[2])) > 1e-8 * w)
        throw NotConverged("quasi-frequencies are not of the form {-W, 0, W} " + describe(params));

    Eigen::VectorXcd v_minus = eig.eigenvectors().col(central[0]);
    Eigen::VectorXcd v_zero = eig.eigenvectors().col(central[1]);
    Eigen::VectorXcd v_plus = eig.eigenvectors().col(central[2]);

    if (omega_rabi < 1e-9 * w) {
        // Triple degeneracy (mu = 0, delta = 0): any basis of the cluster is an
        // eigenbasis. Take the zero mode along axis 3 and split the remainder
        // by mean block index (k = +1 on the lower-index side, the delta -> 0+ limit).
        Eigen::MatrixXcd cluster(gen.dimension(), 3);
        cluster << v_minus, v_zero, v_plus;
        Eigen::VectorXcd e3 = Eigen::VectorXcd::Zero(gen.dimension());
        e3(gen.index(0, 3)) = 1.0;
        v_zero = cluster * (cluster.adjoint() * e3);
        if (v_zero.norm() < 1e-6) throw IllConditioned("degenerate cluster misses axis 3 " + describe(params));
        v_zero.normalize();
        Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(cluster - v_zero * (v_zero.adjoint() * cluster));
        Eigen::MatrixXcd basis = qr.householderQ() * Eigen::MatrixXcd::Identity(gen.dimension(), 2);
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> split(block_index_form(gen, basis.col(0), basis.col(1)));
        v_plus = basis * split.eigenvectors().col(0);
        v_minus = basis * split.eigenvectors().col(1);
    }

    FloquetSolution sol;
    sol.params_ = params;
    sol.rabi_frequency_ = omega_rabi;

    // k = 0: real axis vector, unit length, positive 1-component.
    Eigen::MatrixXcd t0 = as_table(v_zero, params.n_max);
    {
        CVec3 r = value_at_zero(t0);
        Eigen::Index j = 0;
        r.cwiseAbs().maxCoeff(&j);
        if (std::abs(r(j)) < 1e-12) throw IllConditioned("zero mode vanishes at t=0 " + describe(params));
        cplx scale = std::conj(r(j)) / std::abs(r(j)) / r.norm();
        r *= scale;
        double sign = 1.0;
        if (std::abs(r(0).real()) > 1e-9)
            sign = r(0).real() > 0 ? 1.0 : -1.0;
        else if (r(2).real() < 0)
            sign = -1.0;
        t0 *= scale * sign;
    }

    // k = +1: unit length at t = 0, 1-component (else 2-component) real positive.
    Eigen::MatrixXcd tp = as_table(v_plus, params.n_max);
    {
        const CVec3 r = value_at_zero(tp);
        const double norm = r.norm();
        if (norm < 1e-12) throw IllConditioned("Rabi mode vanishes at t=0 " + describe(params));
        const cplx c = std::abs(r(0)) > 1e-6 * norm ? r(0) : r(1);
        tp *= std::conj(c) / std::abs(c) / norm;
    }

    // k = -1: align the independent eigenvector with conj(r_{+1}).
    Eigen::MatrixXcd tm = as_table(v_minus, params.n_max);
    {
        const Eigen::MatrixXcd mirror = tp.colwise().reverse().conjugate();
        const cplx overlap = (mirror.conjugate().cwiseProduct(tm)).sum();
        if (std::abs(overlap) < 1e-6)
            throw IllConditioned("k=-1 mode is not the conjugate of k=+1 " + describe(params));
        tm *= std::conj(overlap) / std::abs(overlap);
        tm /= value_at_zero(tm).norm();
    }

    sol.tables_ = {tm, t0, tp};
    sol.r0_.col(0) = value_at_zero(tm);
    sol.r0_.col(1) = value_at_zero(t0);
    sol.r0_.col(2) = value_at_zero(tp);

    Eigen::JacobiSVD<CMat3> svd(sol.r0_);
    const auto& sv = svd.singularValues();
    sol.condition_ = sv(2) > 0 ? sv(0) / sv(2) : std::numeric_limits<double>::infinity();
    if (sol.condition_ > options.max_condition)
        throw IllConditioned("r0 condition number " + std::to_string(sol.condition_) + " " + describe(params));
    sol.r0_inv_ = sol.r0_.inverse();

    if (options.check_convergence) {
        FloquetParams coarse = params;
        coarse.n_max = params.n_max >= 3 ? params.n_max - 2 : params.n_max + 2;
        SolveOptions inner = options;
        inner.check_convergence = false;
        inner.max_condition = std::numeric_limits<double>::infinity();
        const FloquetSolution other = solve_floquet(coarse, inner);
        sol.convergence_gap_ = std::abs(other.rabi_frequency() - omega_rabi);
        if (sol.convergence_gap_ > options.convergence_tol)
            throw NotConverged("truncation gap " + std::to_string(sol.convergence_gap_) + " " + describe(params));
    }
    return sol;
}

Mat3 assemble_O(const FloquetSolution& sol, double t) {
    CMat3 acc = CMat3::Zero();
    for (int k = -1; k <= 1; ++k)
        acc += std::exp(I * (sol.quasi_frequency(k) * t)) * sol.mode(k, t) * sol.r0_inverse().row(k + 1);
    const double residue = acc.imag().cwiseAbs().maxCoeff();
    if (residue > 1e-9) throw ImaginaryResidue("O(t) imaginary residue " + std::to_string(residue));
    return acc.real();
}

Mat3 assemble_Q(const FloquetSolution& sol, double t) {
    const CMat3 q = sol.mode(0, t) * sol.r0_inverse().row(1);
    const double residue = q.imag().cwiseAbs().maxCoeff();
    if (residue > 1e-9) throw ImaginaryResidue("Q(t) imaginary residue " + std::to_string(residue));
    return q.real();
}

Mat3 precession_generator(const FloquetParams& params, double t) {
    const double nu = params.nu();
    const double drive = 2.0 * params.mu * std::cos(params.omega * t);
    Mat3 m;
    m << 0.0, -nu, 0.0,
         nu, 0.0, -drive,
         0.0, drive, 0.0;
    return m;
}

}  // namespace rabi::floquet
