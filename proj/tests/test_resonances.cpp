#include "doctest.h"

#include "rabi/errors.hpp"
#include "rabi/floquet.hpp"
#include "rabi/resonances.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <map>

using namespace rabi;
using namespace rabi::resonance;
using floquet::FloquetParams;

namespace {

FloquetParams make(double mu, double delta, int n_max = 8) {
    FloquetParams p;
    p.mu = mu;
    p.delta = delta;
    p.n_max = n_max;
    return p;
}

// dOmega/dmu from first-order perturbation of the Hermitian Floquet matrix:
// H = -i L is linear in mu, so dOmega/dmu = <v| -i dL/dmu |v> for the k=+1 eigenvector.
double hellmann_feynman(double mu, double delta) {
    const auto L = floquet::build_generator(make(mu, delta)).matrix;
    const Eigen::MatrixXcd dL = floquet::build_generator(make(1.0, delta)).matrix - floquet::build_generator(make(0.0, delta)).matrix;
    const Eigen::MatrixXcd H = std::complex<double>(0, -1) * L;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    Eigen::Index best = -1;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const double w = es.eigenvalues()(i);
        if (w > 1e-6 && w <= 0.5 && (best < 0 || w < es.eigenvalues()(best))) best = i;
    }
    const Eigen::VectorXcd v = es.eigenvectors().col(best);
    return (v.adjoint() * (std::complex<double>(0, -1) * dL) * v)(0, 0).real();
}

const std::vector<double> small_grid{0.02, 0.04, 0.06, 0.08, 0.10};

}  // namespace

TEST_CASE("kind names round-trip case-insensitively") {
    for (auto k : all_kinds) {
        CHECK(kind_from_string(to_string(k)) == k);
        std::string lower(to_string(k));
        for (auto& ch : lower) ch = static_cast<char>(std::tolower(ch));
        CHECK(kind_from_string(lower) == k);
    }
    CHECK_THROWS_AS(kind_from_string("XX"), ValidationError);
    CHECK(is_root_kind(ResonanceKind::RC));
    CHECK(is_root_kind(ResonanceKind::WS));
    CHECK_FALSE(is_root_kind(ResonanceKind::BS));
}

TEST_CASE("objective values in the RWA regime") {
    CHECK(std::abs(objective(ResonanceKind::BS, make(0.02, 0.0)) - 0.02) < 1e-5);
    CHECK(std::abs(objective(ResonanceKind::EN, make(0.02, 0.02)) - 0.5) < 1e-2);
    const double speed = -objective(ResonanceKind::VS, make(0.02, 0.02));
    CHECK(std::abs(speed - 0.02 / (2 * std::hypot(0.02, 0.02))) < 1e-2);
}

TEST_CASE("mu derivative agrees with Hellmann-Feynman") {
    for (auto [mu, delta] : {std::pair{0.02, 0.0}, {0.02, 0.02}, {0.2, 0.01}, {0.4, -0.03}, {0.45, 0.05}}) {
        CAPTURE(mu);
        CAPTURE(delta);
        CHECK(std::abs(rabi_frequency_mu_derivative(make(mu, delta)) - hellmann_feynman(mu, delta)) < 1e-8);
    }
    // RWA Omega = sqrt(mu^2 + (delta + mu^2/4)^2) with the Bloch-Siegert displacement
    const double mu = 0.02, de = 0.02 + mu * mu / 4;
    CHECK(std::abs(rabi_frequency_mu_derivative(make(mu, 0.02)) - (mu + de * mu / 2) / std::hypot(mu, de)) < 5e-4);
}

TEST_CASE("Bloch-Siegert and collapse-time resonances at mu=0.1") {
    const auto bs = find_resonance(ResonanceKind::BS, 0.1);
    CHECK(std::abs(bs.delta_res / -2.5e-3 - 1.0) < 0.15);
    CHECK(bs.delta_res > bs.bracket.lo);
    CHECK(bs.delta_res < bs.bracket.hi);
    CHECK(bs.value_at_res <= objective(ResonanceKind::BS, make(0.1, bs.bracket.lo)));
    CHECK(bs.value_at_res <= objective(ResonanceKind::BS, make(0.1, bs.bracket.hi)));
    const auto tc = find_resonance(ResonanceKind::TC, 0.1);
    CHECK(std::abs(tc.delta_res / 2.5e-3 - 1.0) < 0.15);
    CHECK(tc.objective_evaluations > 0);
}

TEST_CASE("root and residual sanity at mu=0.3") {
    const auto fc = find_resonance(ResonanceKind::FC, 0.3);
    CHECK(fc.value_at_res < 1e-6);
    for (auto k : {ResonanceKind::RC, ResonanceKind::WS}) {
        const auto r = find_resonance(k, 0.3);
        CHECK(r.value_at_res < 1e-10);
        CHECK(std::abs(objective(k, make(0.3, r.delta_res))) < 1e-10);
    }
}

TEST_CASE("all resonances collapse to zero detuning in the RWA") {
    for (auto k : all_kinds) {
        CAPTURE(to_string(k));
        const double d2 = find_resonance(k, 0.02).delta_res;
        const double d1 = find_resonance(k, 0.01).delta_res;
        CHECK(std::abs(d2) < 2e-4);
        CHECK(std::abs(d1 / d2 - 0.25) < 0.01);
    }
}

TEST_CASE("shift coefficients fall on the +-1/4 branches") {
    // measured branches; see README for the sign comparison
    const std::map<ResonanceKind, double> branch{
        {ResonanceKind::BS, -0.25}, {ResonanceKind::TC, 0.25}, {ResonanceKind::FC, 0.25}, {ResonanceKind::RC, -0.25},
        {ResonanceKind::EN, -0.25}, {ResonanceKind::VS, 0.25}, {ResonanceKind::WS, 0.25}};
    for (auto k : all_kinds) {
        CAPTURE(to_string(k));
        const auto fit = fit_shift_coefficient(k, small_grid);
        CHECK(std::abs(fit.c - branch.at(k)) < 0.02);
        CHECK(fit.fit_residual < 0.01 * std::abs(fit.delta_values.front()));
        CHECK(fit.mu_grid == small_grid);
        CHECK(fit.delta_values.size() == small_grid.size());
    }
}

TEST_CASE("distinct and coincident resonances at mu=0.4") {
    std::map<ResonanceKind, double> d;
    for (auto k : all_kinds) d[k] = find_resonance(k, 0.4).delta_res;
    const double tol = 1e-9;
    // pairs sharing a branch that are genuinely different
    CHECK(std::abs(d[ResonanceKind::BS] - d[ResonanceKind::EN]) > 10 * tol);
    CHECK(std::abs(d[ResonanceKind::TC] - d[ResonanceKind::FC]) > 10 * tol);
    CHECK(std::abs(d[ResonanceKind::VS] - d[ResonanceKind::WS]) > 10 * tol);
    CHECK(std::abs(d[ResonanceKind::TC] - d[ResonanceKind::WS]) > 10 * tol);
    CHECK(std::abs(d[ResonanceKind::RC] - d[ResonanceKind::EN]) > 10 * tol);
    // identities of the definitions: the zero-mean root of Q33 is the Omega
    // minimum, full collapse is n3 = 0, and |dOmega/dmu| equals the speed factor
    CHECK(std::abs(d[ResonanceKind::BS] - d[ResonanceKind::RC]) < 1e-8);
    CHECK(std::abs(d[ResonanceKind::FC] - d[ResonanceKind::WS]) < 1e-8);
    // TC minimizes a finite-difference derivative; its flat minimum is
    // located only to ~1e-6 in delta
    CHECK(std::abs(d[ResonanceKind::TC] - d[ResonanceKind::VS]) < 2e-6);
}

TEST_CASE("speed factor equals |dOmega/dmu|") {
    for (auto [mu, delta] : {std::pair{0.1, 0.0}, {0.3, 0.02}, {0.45, -0.04}}) {
        const auto sol = floquet::solve_floquet(make(mu, delta));
        CHECK(std::abs(splitting_speed_factor(sol) - std::abs(rabi_frequency_mu_derivative(make(mu, delta)))) < 1e-8);
    }
}

TEST_CASE("resonance curves at reference points") {
    const std::vector<ResonanceKind> kinds{ResonanceKind::BS, ResonanceKind::VS, ResonanceKind::EN};
    const std::vector<double> grid{0.2, 0.5};
    const auto pts = resonance_curves(kinds, grid);
    REQUIRE(pts.size() == 6);
    for (const auto& p : pts) CHECK(p.ok);
    CHECK(std::abs(pts[1].rabi_ratio - (1 - 0.25 / 16)) < 1e-2);          // BS, mu=0.5
    CHECK(std::abs(pts[2].speed_ratio - (1 - 0.04 / 8)) < 5e-3);          // VS, mu=0.2
    CHECK(std::abs(pts[4].mean_square_polarization / 5e-3 - 1.0) < 0.1);  // EN, mu=0.2
}

TEST_CASE("curve failures are recorded as gaps") {
    const std::vector<ResonanceKind> kinds{ResonanceKind::BS};
    const std::vector<double> bad{0.6};
    CHECK_THROWS_AS(resonance_curves(kinds, bad), ValidationError);
}

TEST_CASE("bracketing and validation errors") {
    CHECK_THROWS_AS(find_resonance(ResonanceKind::BS, 0.1, Interval{0.3, 0.31}), NoBracket);
    CHECK_THROWS_AS(find_resonance(ResonanceKind::WS, 0.1, Interval{0.3, 0.31}), NoBracket);
    CHECK_THROWS_AS(find_resonance(ResonanceKind::BS, 0.0), ValidationError);
    CHECK_THROWS_AS(find_resonance(ResonanceKind::BS, 0.6), ValidationError);
    CHECK_THROWS_AS(find_resonance(ResonanceKind::BS, 0.1, Interval{0.1, 0.0}), ValidationError);
    const std::vector<double> short_grid{0.02, 0.04, 0.06, 0.08};
    CHECK_THROWS_AS(fit_shift_coefficient(ResonanceKind::BS, short_grid), ValidationError);
    const std::vector<double> wide{0.02, 0.04, 0.06, 0.08, 0.2};
    CHECK_THROWS_AS(fit_shift_coefficient(ResonanceKind::BS, wide), ValidationError);
    const std::vector<double> unsorted{0.02, 0.06, 0.04, 0.08, 0.1};
    CHECK_THROWS_AS(fit_shift_coefficient(ResonanceKind::BS, unsorted), ValidationError);
}

TEST_CASE("resonance search is deterministic") {
    for (auto k : {ResonanceKind::TC, ResonanceKind::RC}) {
        const auto a = find_resonance(k, 0.25);
        const auto b = find_resonance(k, 0.25);
        CHECK(a.delta_res == b.delta_res);
        CHECK(a.value_at_res == b.value_at_res);
        CHECK(a.objective_evaluations == b.objective_evaluations);
    }
}
