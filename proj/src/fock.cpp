#include "rabi/fock.hpp"

#include "rabi/errors.hpp"
#include "rabi/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace rabi::fock {

namespace {

constexpr cplx I{0.0, 1.0};
constexpr Eigen::Index dense_limit = 3000;

std::vector<double> sample_times(const FockConfig& c) {
    const auto steps = static_cast<long>(std::floor(c.t_end / c.dt + 1e-9));
    std::vector<double> t(static_cast<std::size_t>(steps) + 1);
    for (long i = 0; i <= steps; ++i) t[static_cast<std::size_t>(i)] = static_cast<double>(i) * c.dt;
    return t;
}

bool use_dense(const FockConfig& c) {
    switch (c.propagator) {
        case Propagator::Dense: return true;
        case Propagator::Krylov: return false;
        case Propagator::Auto: break;
    }
    return c.dimension() <= dense_limit;
}

// exp(-i H tau) psi on a Lanczos subspace; returns the a-posteriori error estimate.
double krylov_step(const Eigen::SparseMatrix<double>& H, Eigen::VectorXcd& psi, double tau, int m_max) {
    const double beta0 = psi.norm();
    if (beta0 == 0.0) return 0.0;
    std::vector<Eigen::VectorXcd> basis;
    basis.reserve(static_cast<std::size_t>(m_max));
    std::vector<double> alpha, beta;
    basis.push_back(psi / beta0);
    double residual = 0.0;
    for (int j = 0; j < m_max; ++j) {
        Eigen::VectorXcd w = H * basis.back();
        const double a = basis.back().dot(w).real();
        alpha.push_back(a);
        w -= a * basis.back();
        if (j > 0) w -= beta.back() * basis[basis.size() - 2];
        // full reorthogonalization keeps the small subspace exact in practice
        for (const auto& v : basis) w -= v.dot(w) * v;
        const double b = w.norm();
        residual = b;
        if (b < 1e-14 || j == m_max - 1) break;
        beta.push_back(b);
        basis.push_back(w / b);
    }
    const auto m = static_cast<Eigen::Index>(alpha.size());
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        T(i, i) = alpha[static_cast<std::size_t>(i)];
        if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[static_cast<std::size_t>(i)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    const Eigen::VectorXcd phases = (-I * tau * es.eigenvalues().cast<cplx>()).array().exp();
    const Eigen::VectorXcd y = es.eigenvectors().cast<cplx>() *
                               (phases.asDiagonal() * es.eigenvectors().row(0).transpose().cast<cplx>());
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(psi.size());
    for (Eigen::Index i = 0; i < m; ++i) out += y(i) * basis[static_cast<std::size_t>(i)];
    psi = beta0 * out;
    return beta0 * residual * std::abs(y(m - 1));
}

class Stepper {
public:
    Stepper(const FockConfig& c, const Eigen::SparseMatrix<double>& H, const Eigen::VectorXcd& psi0)
        : H_(H), dense_(use_dense(c)), psi_(psi0) {
        if (dense_) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es{Eigen::MatrixXd(H)};
            energies_ = es.eigenvalues();
            vectors_ = es.eigenvectors();
            coeff_ = vectors_.transpose() * psi0;
        }
    }

    Eigen::VectorXcd at(double t) {
        if (dense_) {
            const Eigen::VectorXcd c =
                ((-I * t) * energies_.cast<cplx>()).array().exp() * coeff_.array();
            return vectors_ * c;
        }
        while (t_ < t) {
            const double tau = std::min(tau_, t - t_);
            Eigen::VectorXcd trial = psi_;
            const double err = krylov_step(H_, trial, tau, 30);
            if (err > 1e-13 && tau > 1e-6) {
                tau_ = 0.5 * tau;
                continue;
            }
            psi_ = std::move(trial);
            t_ += tau;
            if (err < 1e-15) tau_ = std::min(2.0 * tau_, 10.0);
        }
        return psi_;
    }

private:
    const Eigen::SparseMatrix<double>& H_;
    bool dense_;
    Eigen::VectorXd energies_;
    Eigen::MatrixXd vectors_;
    Eigen::VectorXcd coeff_;
    Eigen::VectorXcd psi_;
    double t_ = 0.0;
    double tau_ = 0.5;
};

}  // namespace

void FockConfig::validate() const {
    if (!(n_bar > 0.0 && n_bar <= 1e4)) throw ValidationError("n_bar must lie in (0, 1e4]");
    if (cutoff < 2 || cutoff < n_bar + 12.0 * std::sqrt(n_bar))
        throw ValidationError("cutoff must be >= n_bar + 12 sqrt(n_bar) (got " + std::to_string(cutoff) + ")");
    if (!(mu >= 0.0) || !std::isfinite(mu)) throw ValidationError("mu must be >= 0");
    if (!(omega > 0.0)) throw ValidationError("omega must be positive");
    if (!(nu() > 0.0)) throw ValidationError("qubit frequency omega + delta must be positive");
    if (!(dt > 0.0)) throw ValidationError("dt must be positive");
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ValidationError("t_end must be >= 0");
}

Eigen::SparseMatrix<double> build_hamiltonian(const FockConfig& c) {
    c.validate();
    const Eigen::Index dim = c.dimension();
    const double g = c.g();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(3 * dim));
    for (int n = 0; n < c.cutoff; ++n) {
        for (int q = 0; q < 2; ++q) {
            const Eigen::Index i = 2 * n + q;
            trip.emplace_back(i, i, c.omega * (n + 0.5) + (q == 0 ? 0.5 : -0.5) * c.nu());
            if (n + 1 < c.cutoff && g != 0.0) {
                const Eigen::Index j = 2 * (n + 1) + (1 - q);
                const double el = g * std::sqrt(n + 1.0);
                trip.emplace_back(i, j, el);
                trip.emplace_back(j, i, el);
            }
        }
    }
    Eigen::SparseMatrix<double> H(dim, dim);
    H.setFromTriplets(trip.begin(), trip.end());
    return H;
}

CoherentState coherent_state(cplx alpha, int cutoff) {
    if (cutoff < 1) throw ValidationError("cutoff must be positive");
    CoherentState st;
    st.amplitudes.resize(cutoff);
    cplx term = std::exp(-0.5 * std::norm(alpha));
    double mass = 0.0;
    for (int n = 0; n < cutoff; ++n) {
        if (n > 0) term *= alpha / std::sqrt(static_cast<double>(n));
        st.amplitudes(n) = term;
        mass += std::norm(term);
    }
    st.tail_mass = std::max(0.0, 1.0 - mass);
    st.amplitudes /= std::sqrt(mass);
    return st;
}

namespace {

Eigen::VectorXcd product_state(const Eigen::VectorXcd& field, const Vec3& p) {
    if (std::abs(p.norm() - 1.0) > 1e-12) throw ValidationError("polarization must be a unit vector");
    const double theta = std::acos(std::clamp(p(2), -1.0, 1.0));
    const double phi = std::atan2(p(1), p(0));
    const cplx up = std::cos(0.5 * theta);
    const cplx down = std::exp(I * phi) * std::sin(0.5 * theta);
    Eigen::VectorXcd psi(2 * field.size());
    for (Eigen::Index n = 0; n < field.size(); ++n) {
        psi(2 * n) = field(n) * up;
        psi(2 * n + 1) = field(n) * down;
    }
    return psi;
}

}  // namespace

Eigen::VectorXcd initial_state(const FockConfig& c, const Vec3& p) {
    c.validate();
    return product_state(coherent_state(std::sqrt(c.n_bar), c.cutoff).amplitudes, p);
}

QuantumTrace evolve(const FockConfig& c, const Vec3& p) {
    c.validate();
    const auto H = build_hamiltonian(c);
    const CoherentState coh = coherent_state(std::sqrt(c.n_bar), c.cutoff);
    const Eigen::VectorXcd psi0 = product_state(coh.amplitudes, p);
    const double e0 = psi0.dot(H * psi0).real();

    QuantumTrace tr;
    tr.tail_mass = coh.tail_mass;
    tr.times = sample_times(c);
    Stepper stepper(c, H, psi0);
    for (double t : tr.times) {
        const Eigen::VectorXcd psi = stepper.at(t);
        cplx rho01 = 0.0;  // sum_n psi*(n,0) psi(n,1)
        double pop0 = 0.0, pop1 = 0.0, photons = 0.0;
        cplx field = 0.0;
        for (int n = 0; n < c.cutoff; ++n) {
            const cplx u = psi(2 * n), d = psi(2 * n + 1);
            rho01 += std::conj(u) * d;
            pop0 += std::norm(u);
            pop1 += std::norm(d);
            photons += n * (std::norm(u) + std::norm(d));
            if (n + 1 < c.cutoff) {
                const double s = std::sqrt(n + 1.0);
                field += s * (std::conj(u) * psi(2 * (n + 1)) + std::conj(d) * psi(2 * (n + 1) + 1));
            }
        }
        const double norm = pop0 + pop1;
        const Vec3 s{2.0 * rho01.real() / norm, 2.0 * rho01.imag() / norm, (pop0 - pop1) / norm};
        tr.sigma_expectations.push_back(s);
        tr.purity.push_back(0.5 * (1.0 + s.squaredNorm()));
        tr.field_mean.push_back(field / norm);
        tr.photon_mean.push_back(photons / norm);
        tr.norm_drift = std::max(tr.norm_drift, std::abs(norm - 1.0));
        const Eigen::Index top = 2 * (c.cutoff - 1);
        tr.top_occupation = std::max(tr.top_occupation, std::norm(psi(top)) + std::norm(psi(top + 1)));
        const double e = psi.dot(H * psi).real();
        tr.energy_drift = std::max(tr.energy_drift, std::abs(e - e0) / std::max(std::abs(e0), 1e-300));
    }
    if (tr.norm_drift > 1e-8)
        throw CutoffReflection("norm drift " + std::to_string(tr.norm_drift) + " exceeds 1e-8");
    if (tr.top_occupation > 1e-6)
        throw CutoffReflection("top Fock level occupation " + std::to_string(tr.top_occupation) + " exceeds 1e-6");
    return tr;
}

std::vector<Eigen::VectorXcd> evolve_states(const FockConfig& c, const Vec3& p, std::span<const double> times) {
    c.validate();
    if (!std::is_sorted(times.begin(), times.end()) || (!times.empty() && times.front() < 0.0))
        throw ValidationError("times must be nonnegative and nondecreasing");
    const auto H = build_hamiltonian(c);
    Stepper stepper(c, H, initial_state(c, p));
    std::vector<Eigen::VectorXcd> out;
    out.reserve(times.size());
    for (double t : times) out.push_back(stepper.at(t));
    return out;
}

Eigen::MatrixXd husimi(const Eigen::VectorXcd& state, int cutoff, cplx center, const HusimiGrid& grid) {
    if (grid.points < 3 || !(grid.half_width > 0.0)) throw ValidationError("Husimi grid needs >= 3 points and positive width");
    if (state.size() != 2 * static_cast<Eigen::Index>(cutoff)) throw ValidationError("state size does not match cutoff");
    const double h = 2.0 * grid.half_width / (grid.points - 1);
    Eigen::MatrixXd Q(grid.points, grid.points);  // (row = imaginary index, col = real index)
    const auto rows = parallel_map(static_cast<std::size_t>(grid.points), [&](std::size_t iy) {
        Eigen::VectorXd row(grid.points);
        for (int ix = 0; ix < grid.points; ++ix) {
            const cplx beta = center + cplx{-grid.half_width + ix * h, -grid.half_width + static_cast<double>(iy) * h};
            const cplx bc = std::conj(beta);
            cplx term = std::exp(-0.5 * std::norm(beta));
            cplx up = 0.0, down = 0.0;
            for (int n = 0; n < cutoff; ++n) {
                if (n > 0) term *= bc / std::sqrt(static_cast<double>(n));
                up += term * state(2 * n);
                down += term * state(2 * n + 1);
            }
            row(ix) = (std::norm(up) + std::norm(down)) / std::numbers::pi;
        }
        return row;
    });
    for (int iy = 0; iy < grid.points; ++iy) Q.row(iy) = rows[static_cast<std::size_t>(iy)].transpose();
    return Q;
}

FragmentAnalysis fragment_analysis(const FockConfig& c, const Vec3& p, std::span<const double> times,
                                   const HusimiGrid& grid) {
    const auto states = evolve_states(c, p, times);
    const double h = 2.0 * grid.half_width / (grid.points - 1);
    FragmentAnalysis fa;
    for (std::size_t i = 0; i < states.size(); ++i) {
        const double t = times[i];
        const Eigen::VectorXcd& psi = states[i];
        cplx mean = 0.0;
        for (int n = 0; n + 1 < c.cutoff; ++n)
            mean += std::sqrt(n + 1.0) *
                    (std::conj(psi(2 * n)) * psi(2 * n + 2) + std::conj(psi(2 * n + 1)) * psi(2 * n + 3));
        const Eigen::MatrixXd Q = husimi(psi, c.cutoff, mean, grid);
        auto point = [&](int iy, int ix) {
            return mean + cplx{-grid.half_width + ix * h, -grid.half_width + iy * h};
        };

        const double qmax = Q.maxCoeff();
        struct Peak { double value; int iy, ix; };
        std::vector<Peak> peaks;
        for (int iy = 1; iy + 1 < grid.points; ++iy)
            for (int ix = 1; ix + 1 < grid.points; ++ix) {
                const double v = Q(iy, ix);
                if (v < 1e-3 * qmax) continue;
                bool is_max = true;
                for (int dy = -1; dy <= 1 && is_max; ++dy)
                    for (int dx = -1; dx <= 1; ++dx)
                        if ((dy || dx) && Q(iy + dy, ix + dx) > v) { is_max = false; break; }
                if (is_max) peaks.push_back({v, iy, ix});
            }
        std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.value > b.value; });
        if (peaks.size() < 2)
            throw PeaksUnresolved("single Husimi peak at t=" + std::to_string(t));
        const cplx pa = point(peaks[0].iy, peaks[0].ix), pb = point(peaks[1].iy, peaks[1].ix);
        if (std::abs(pa - pb) < 3.0)
            throw PeaksUnresolved("Husimi peaks closer than three vacuum widths at t=" + std::to_string(t));

        // split along the perpendicular bisector of the two peaks
        const cplx mid = 0.5 * (pa + pb), axis = pa - pb;
        std::array<double, 2> mass{0.0, 0.0};
        std::array<cplx, 2> moment{0.0, 0.0};
        for (int iy = 0; iy < grid.points; ++iy)
            for (int ix = 0; ix < grid.points; ++ix) {
                const cplx z = point(iy, ix);
                const double side = (std::conj(axis) * (z - mid)).real();
                const double q = Q(iy, ix);
                const double wa = side > 0 ? 1.0 : (side < 0 ? 0.0 : 0.5);
                mass[0] += wa * q;
                mass[1] += (1.0 - wa) * q;
                moment[0] += wa * q * z;
                moment[1] += (1.0 - wa) * q * z;
            }
        const double total = mass[0] + mass[1];
        const cplx unwind = std::exp(I * (c.omega * t));
        std::array<cplx, 2> centers{unwind * moment[0] / mass[0], unwind * moment[1] / mass[1]};
        fa.times.push_back(t);
        fa.peak_centers.push_back(centers);
        fa.peak_weights.push_back({mass[0] / total, mass[1] / total});
        fa.separation.push_back(std::abs(centers[0] - centers[1]));
    }
    return fa;
}

}  // namespace rabi::fock
