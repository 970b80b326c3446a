#include "rabi/semiclassics.hpp"

#include "rabi/errors.hpp"
#include "rabi/resonances.hpp"

#include <cmath>

namespace rabi::semiclassics {

namespace {
constexpr cplx I{0.0, 1.0};
}

cplx WavePacket::transform(double s) const {
    if (radial_transform) return radial_transform(s);
    return std::exp(-0.5 * radial_sigma * radial_sigma * s * s);
}

void WavePacket::validate() const {
    if (std::abs(polarization.norm() - 1.0) > 1e-12) throw ValidationError("packet polarization must be a unit vector");
    if (!(epsilon > 0.0 && epsilon <= 0.1)) throw ValidationError("packet epsilon must lie in (0, 0.1]");
    if (!(radial_sigma > 0.0)) throw ValidationError("packet radial_sigma must be positive");
    if (!(std::abs(zeta_bar) > 0.0)) throw ValidationError("packet zeta_bar must be nonzero");
}

WavePacket WavePacket::coherent(double epsilon, Vec3 polarization, cplx zeta_bar) {
    WavePacket w;
    w.zeta_bar = zeta_bar;
    w.epsilon = epsilon;
    w.radial_sigma = 0.5 * std::sqrt(epsilon);
    w.polarization = polarization;
    return w;
}

std::pair<cplx, cplx> SplitReport::fragment_centers(double t) const {
    const cplx rot = std::exp(-I * (omega * t));
    return {rot * (zeta_bar + velocity * t), rot * (zeta_bar - velocity * t)};
}

double rabi_frequency_slope(const FloquetSolution& sol, const WavePacket& packet) {
    return sol.params().mu / std::abs(packet.zeta_bar) * resonance::rabi_frequency_mu_derivative(sol.params());
}

PolarizationTrace polarization_trace(const FloquetSolution& sol, const WavePacket& packet,
                                     std::span<const double> times) {
    packet.validate();
    const double slope = rabi_frequency_slope(sol, packet);
    const floquet::CVec3 weights = sol.r0_inverse() * packet.polarization.cast<cplx>();

    PolarizationTrace tr;
    tr.times.assign(times.begin(), times.end());
    for (double t : times) {
        if (t < 0) throw ValidationError("polarization_trace: times must be >= 0");
        floquet::CVec3 s = floquet::CVec3::Zero();
        for (int k = -1; k <= 1; ++k) {
            const cplx damp = k == 0 ? cplx{1.0} : packet.transform(k * slope * t);
            s += damp * std::exp(I * (sol.quasi_frequency(k) * t)) * weights(k + 1) * sol.mode(k, t);
        }
        const double residue = s.imag().cwiseAbs().maxCoeff();
        if (residue > 1e-9) throw ImaginaryResidue("polarization imaginary residue " + std::to_string(residue));
        const Vec3 sr = s.real();
        tr.s_expectation.push_back(sr);
        tr.envelope.push_back(std::abs(packet.transform(slope * t)));
        tr.purity.push_back(0.5 * (1.0 + sr.squaredNorm()));
    }
    return tr;
}

double collapse_time(const FloquetSolution& sol, const WavePacket& packet) {
    packet.validate();
    const double dmu = resonance::rabi_frequency_mu_derivative(sol.params());
    if (std::abs(dmu) < 1e-10) throw DegenerateCollapse("Rabi frequency does not depend on mu; no collapse");
    const double slope = sol.params().mu / std::abs(packet.zeta_bar) * dmu;
    return std::sqrt(2.0) / (packet.radial_sigma * std::abs(slope));
}

SplitReport splitting(const FloquetSolution& sol, const WavePacket& packet) {
    packet.validate();
    const Vec3 inv = sol.r0_inverse().row(1).real().transpose();
    const double norm = inv.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) throw IllConditioned("zero-mode inverse row is degenerate");
    const double lambda = sol.params().mu / std::abs(packet.zeta_bar);

    SplitReport rep;
    rep.velocity = -2.0 * I * packet.epsilon * lambda * std::exp(I * packet.phi()) * sol.fourier(0, 1, 1) * norm;
    rep.direction = inv / norm;
    const double pn = packet.polarization.dot(rep.direction);
    rep.weights = {0.5 * (1.0 + pn), 0.5 * (1.0 - pn)};
    rep.zeta_bar = packet.zeta_bar;
    rep.omega = sol.params().omega;
    return rep;
}

Eigen::Matrix2cd SubleadingSymbol::matrix() const {
    const Eigen::Vector3cd c = secular + bounded;
    Eigen::Matrix2cd m;
    m << c(2), c(0) - I * c(1),
         c(0) + I * c(1), -c(2);
    return m;
}

// z1(t) = -2 i lambda e^{i phi} e^{-i w t} int_0^t s_1(t') e^{i w t'} dt', with
// s_1 expanded in Floquet modes: each (k, n) term integrates to
// (e^{i a t} - 1) / (i a), a = k Omega - (n - 1) w; (k, n) = (0, 1) is secular.
SubleadingSymbol subleading_symbol(const FloquetSolution& sol, const WavePacket& packet, double t) {
    packet.validate();
    const auto& p = sol.params();
    const double w = p.omega;
    const double lambda = p.mu / std::abs(packet.zeta_bar);
    const cplx prefactor = -2.0 * I * lambda * std::exp(I * packet.phi()) * std::exp(-I * (w * t));

    SubleadingSymbol out;
    out.secular = prefactor * t * sol.fourier(0, 1, 1) * sol.r0_inverse().row(1).transpose();
    out.bounded.setZero();
    for (int k = -1; k <= 1; ++k) {
        for (int n = -p.n_max; n <= p.n_max; ++n) {
            if (k == 0 && n == 1) continue;
            const cplx coef = sol.fourier(k, n, 1);
            if (std::abs(coef) < 1e-15) continue;
            const double a = sol.quasi_frequency(k) - (n - 1) * w;
            if (std::abs(a) < 1e-6) throw SmallDenominator("resonant term k=" + std::to_string(k) + " n=" + std::to_string(n));
            const cplx integral = (std::exp(I * (a * t)) - 1.0) / (I * a);
            out.bounded += prefactor * coef * integral * sol.r0_inverse().row(k + 1).transpose();
        }
    }
    return out;
}

}  // namespace rabi::semiclassics
