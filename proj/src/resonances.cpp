#include "rabi/resonances.hpp"

#include "rabi/errors.hpp"
#include "rabi/optimize.hpp"
#include "rabi/parallel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>
#include <limits>
#include <numbers>

namespace rabi::resonance {

using floquet::FloquetParams;
using floquet::FloquetSolution;
using floquet::Vec3;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kPresample = 21;
constexpr double kMinTol = 1e-9;
constexpr double kRootTol = 1e-10;

double sample_time(const FloquetParams& p, int i) {
    return 2.0 * std::numbers::pi / p.omega * i / period_samples;
}

// Q33(t) over one field period.
std::vector<double> q33_samples(const FloquetSolution& sol) {
    std::vector<double> out(period_samples);
    for (int i = 0; i < period_samples; ++i) out[i] = floquet::assemble_Q(sol, sample_time(sol.params(), i))(2, 2);
    return out;
}

double zero_mode_inverse_norm(const FloquetSolution& sol) { return sol.r0_inverse().row(1).real().norm(); }

double split_direction_3(const FloquetSolution& sol) {
    return sol.r0_inverse()(1, 2).real() / zero_mode_inverse_norm(sol);
}

FloquetParams at(double mu, double delta, int n_max) {
    FloquetParams p;
    p.mu = mu;
    p.delta = delta;
    p.n_max = n_max;
    return p;
}

}  // namespace

std::string_view to_string(ResonanceKind kind) {
    switch (kind) {
        case ResonanceKind::BS: return "BS";
        case ResonanceKind::TC: return "TC";
        case ResonanceKind::FC: return "FC";
        case ResonanceKind::RC: return "RC";
        case ResonanceKind::EN: return "EN";
        case ResonanceKind::VS: return "VS";
        case ResonanceKind::WS: return "WS";
    }
    return "?";
}

ResonanceKind kind_from_string(std::string_view name) {
    std::string upper(name);
    std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
    for (ResonanceKind k : all_kinds)
        if (to_string(k) == upper) return k;
    throw ValidationError("unknown resonance kind '" + std::string(name) + "'");
}

bool is_root_kind(ResonanceKind kind) { return kind == ResonanceKind::RC || kind == ResonanceKind::WS; }

double rabi_frequency_mu_derivative(const FloquetParams& params) {
    const double h = std::max(1e-4, 1e-3 * params.mu);
    floquet::SolveOptions checked;
    floquet::SolveOptions quick;
    quick.check_convergence = false;
    // Omega is even in mu, so a step below zero is folded back.
    auto omega_at = [&](double m, const floquet::SolveOptions& o) {
        FloquetParams q = params;
        q.mu = std::abs(m);
        return floquet::solve_floquet(q, o).rabi_frequency();
    };
    try {
        const double d_h = (omega_at(params.mu + h, checked) - omega_at(params.mu - h, quick)) / (2 * h);
        const double d_h2 = (omega_at(params.mu + h / 2, quick) - omega_at(params.mu - h / 2, quick)) / h;
        return (4.0 * d_h2 - d_h) / 3.0;
    } catch (const NumericalError& e) {
        throw DerivativeFailure(std::string("d Omega/d mu: ") + e.name() + ": " + e.what());
    }
}

double splitting_speed_factor(const FloquetSolution& sol) {
    return 2.0 * std::abs(sol.fourier(0, 1, 1)) * zero_mode_inverse_norm(sol);
}

double phase_averaged_polarization(const FloquetSolution& sol, const Vec3& p) {
    double acc = 0.0;
    for (int i = 0; i < period_samples; ++i) {
        const Vec3 r = sol.mode(0, sample_time(sol.params(), i)).real();
        const double proj = r.dot(p);
        acc += proj * proj / r.squaredNorm();
    }
    return acc / period_samples;
}

double objective(ResonanceKind kind, const FloquetParams& params) {
    if (kind == ResonanceKind::TC) return -std::abs(rabi_frequency_mu_derivative(params));
    const FloquetSolution sol = floquet::solve_floquet(params);
    switch (kind) {
        case ResonanceKind::BS: return sol.rabi_frequency();
        case ResonanceKind::FC: {
            const auto q = q33_samples(sol);
            double m = 0.0;
            for (double v : q) m = std::max(m, std::abs(v));
            return m;
        }
        case ResonanceKind::RC: {
            const auto q = q33_samples(sol);
            double s = 0.0;
            for (double v : q) s += v;
            return s / period_samples;
        }
        case ResonanceKind::EN: return phase_averaged_polarization(sol, Vec3::UnitZ());
        case ResonanceKind::VS: return -0.5 * splitting_speed_factor(sol);
        case ResonanceKind::WS: return split_direction_3(sol);
        case ResonanceKind::TC: break;
    }
    return kNaN;
}

double characteristic_value(ResonanceKind kind, const FloquetParams& params) {
    switch (kind) {
        case ResonanceKind::TC: return 1.0 / std::abs(rabi_frequency_mu_derivative(params));
        case ResonanceKind::VS: return splitting_speed_factor(floquet::solve_floquet(params));
        case ResonanceKind::RC:
        case ResonanceKind::WS: return std::abs(objective(kind, params));
        default: return objective(kind, params);
    }
}

namespace {

struct Presample {
    std::vector<double> x;
    std::vector<double> f;  // NaN where the solve failed
};

Presample presample(const optimize::Objective& f, Interval b, int& evals) {
    Presample s;
    for (int i = 0; i < kPresample; ++i) {
        const double x = b.lo + (b.hi - b.lo) * i / (kPresample - 1);
        double v = kNaN;
        try {
            v = f(x);
        } catch (const NumericalError&) {
        }
        ++evals;
        s.x.push_back(x);
        s.f.push_back(v);
    }
    return s;
}

// Interior local minimum of the presample closest to the bracket center, or
// -1 if there is none. Far from the center the folded Rabi frequency has
// spurious minima where it wraps around the zone boundary.
int interior_minimum(const Presample& s, double center) {
    int best = -1;
    for (int i = 1; i + 1 < kPresample; ++i) {
        if (std::isnan(s.f[i - 1]) || std::isnan(s.f[i]) || std::isnan(s.f[i + 1])) continue;
        if (!(s.f[i] <= s.f[i - 1] && s.f[i] <= s.f[i + 1])) continue;
        if (best < 0 || std::abs(s.x[i] - center) < std::abs(s.x[best] - center)) best = i;
    }
    return best;
}

struct Triple {
    double a, b, c;
};

// Presample, then zoom into the cell around the best candidate: an interior
// minimum (to resolve any zone-boundary gap inside its cell) or a valid
// sample next to a failed one, where a minimum may hide beside the gap.
std::optional<Triple> locate_minimum(const optimize::Objective& f, Interval b, int& evals) {
    double center = 0.5 * (b.lo + b.hi);
    for (int level = 0; level < 4; ++level) {
        const Presample s = presample(f, b, evals);
        if (const int i = interior_minimum(s, center); i >= 0) {
            if (level > 0) return Triple{s.x[i - 1], s.x[i], s.x[i + 1]};
            center = s.x[i];
            b = {s.x[i - 1], s.x[i + 1]};
            continue;
        }
        int edge = -1;
        for (int i = 1; i + 1 < kPresample; ++i) {
            if (std::isnan(s.f[i]) || !(std::isnan(s.f[i - 1]) || std::isnan(s.f[i + 1]))) continue;
            const double lo = std::isnan(s.f[i - 1]) ? s.f[i + 1] : s.f[i - 1];
            if (!std::isnan(lo) && lo < s.f[i]) continue;  // descending away from the gap
            if (edge < 0 || std::abs(s.x[i] - center) < std::abs(s.x[edge] - center)) edge = i;
        }
        if (edge < 0) return std::nullopt;
        center = s.x[edge];
        b = {s.x[edge - 1], s.x[edge + 1]};
    }
    return std::nullopt;
}

std::vector<int> sign_changes(const Presample& s) {
    std::vector<int> out;
    for (int i = 0; i + 1 < kPresample; ++i) {
        if (std::isnan(s.f[i]) || std::isnan(s.f[i + 1])) continue;
        if (s.f[i] == 0.0 || (s.f[i] > 0) != (s.f[i + 1] > 0)) out.push_back(i);
    }
    return out;
}

Interval widened(Interval b) {
    const double c = 0.5 * (b.lo + b.hi);
    const double half = 0.5 * (b.hi - b.lo);
    // beyond |delta| = omega/2 the nearest resonance is a different multiphoton one
    return {std::max(c - 4 * half, std::min(b.lo, -0.5)), std::min(c + 4 * half, std::max(b.hi, 0.5))};
}

}  // namespace

ResonanceResult find_resonance(ResonanceKind kind, double mu, std::optional<Interval> bracket, int n_max) {
    if (!(mu > 0.0 && mu <= 0.5)) throw ValidationError("find_resonance: mu must lie in (0, 0.5]");
    Interval b = bracket.value_or(Interval{-2 * mu * mu, 2 * mu * mu});
    if (!(b.lo < b.hi)) throw ValidationError("find_resonance: empty bracket");

    ResonanceResult res;
    res.kind = kind;
    res.mu = mu;
    const optimize::Objective f = [&](double d) { return objective(kind, at(mu, d, n_max)); };

    for (int attempt = 0; attempt < 2; ++attempt, b = widened(b)) {
        res.bracket = b;
        if (!is_root_kind(kind)) {
            const auto t = locate_minimum(f, b, res.objective_evaluations);
            if (!t) continue;
            const auto m = optimize::brent_minimize(f, t->a, t->b, t->c, kMinTol);
            res.objective_evaluations += m.evaluations;
            res.delta_res = m.x;
            res.value_at_res = characteristic_value(kind, at(mu, m.x, n_max));
            return res;
        }

        const Presample s = presample(f, b, res.objective_evaluations);
        const auto changes = sign_changes(s);
        if (changes.empty()) continue;
        std::vector<optimize::Extremum> roots;
        for (int i : changes) {
            auto r = optimize::bracketed_root(f, s.x[i], s.x[i + 1], 1e-15);
            res.objective_evaluations += r.evaluations;
            roots.push_back(r);
        }
        // The period average of Q33 factorizes into n3 times the mean of
        // r_{0,3}; the n3 root is full collapse (FC), so RC takes the root
        // where Q33 still oscillates. WS takes the root nearest the center.
        auto pick = roots.begin();
        if (kind == ResonanceKind::RC) {
            double best = -1.0;
            for (auto it = roots.begin(); it != roots.end(); ++it) {
                const double amp = objective(ResonanceKind::FC, at(mu, it->x, n_max));
                ++res.objective_evaluations;
                if (amp > best) {
                    best = amp;
                    pick = it;
                }
            }
        } else {
            const double c = 0.5 * (b.lo + b.hi);
            pick = std::min_element(roots.begin(), roots.end(),
                                    [c](const auto& x, const auto& y) { return std::abs(x.x - c) < std::abs(y.x - c); });
        }
        if (!(std::abs(pick->fx) < kRootTol))
            throw NotConverged("root residual " + std::to_string(pick->fx) + " above tolerance");
        res.delta_res = pick->x;
        res.value_at_res = std::abs(pick->fx);
        return res;
    }
    throw NoBracket(std::string(to_string(kind)) + " resonance not bracketed for mu=" + std::to_string(mu));
}

SeriesFit fit_shift_coefficient(ResonanceKind kind, std::span<const double> mu_grid) {
    if (mu_grid.size() < 5) throw ValidationError("fit_shift_coefficient: need at least 5 mu values");
    for (std::size_t i = 0; i < mu_grid.size(); ++i) {
        if (!(mu_grid[i] > 0.0 && mu_grid[i] <= 0.12))
            throw ValidationError("fit_shift_coefficient: mu values must lie in (0, 0.12]");
        if (i > 0 && !(mu_grid[i] > mu_grid[i - 1]))
            throw ValidationError("fit_shift_coefficient: mu grid must be strictly increasing");
    }
    SeriesFit fit;
    fit.kind = kind;
    fit.mu_grid.assign(mu_grid.begin(), mu_grid.end());
    fit.delta_values = parallel_map(mu_grid.size(), [&](std::size_t i) {
        return find_resonance(kind, mu_grid[i]).delta_res;
    });

    const auto n = static_cast<Eigen::Index>(mu_grid.size());
    Eigen::MatrixXd design(n, 3);
    Eigen::VectorXd rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double m = mu_grid[i];
        design(i, 0) = m * m;
        design(i, 1) = m * m * m;
        design(i, 2) = m * m * m * m;
        rhs(i) = fit.delta_values[i];
    }
    // Columns scaled to unit norm so the rank test is meaningful.
    const Eigen::VectorXd scale = design.colwise().norm().transpose();
    const Eigen::MatrixXd scaled = design * scale.cwiseInverse().asDiagonal();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
    qr.setThreshold(1e-10);
    if (qr.rank() < 3) throw RankDeficientFit("fit_shift_coefficient: design matrix is rank deficient");
    const Eigen::VectorXd coef = qr.solve(rhs).cwiseQuotient(scale);
    fit.c = coef(0);
    fit.c3 = coef(1);
    fit.c4 = coef(2);
    fit.fit_residual = (design * coef - rhs).cwiseAbs().maxCoeff();
    return fit;
}

std::vector<CurvePoint> resonance_curves(std::span<const ResonanceKind> kinds, std::span<const double> mu_grid) {
    for (double m : mu_grid)
        if (!(m > 0.0 && m <= 0.5)) throw ValidationError("resonance_curves: mu values must lie in (0, 0.5]");
    const std::size_t cols = mu_grid.size();
    return parallel_map(kinds.size() * cols, [&](std::size_t job) {
        CurvePoint pt;
        pt.kind = kinds[job / cols];
        pt.mu = mu_grid[job % cols];
        try {
            const ResonanceResult r = find_resonance(pt.kind, pt.mu);
            const FloquetParams p = at(pt.mu, r.delta_res, 8);
            const FloquetSolution sol = floquet::solve_floquet(p);
            pt.delta_res = r.delta_res;
            pt.value_at_res = r.value_at_res;
            pt.rabi_ratio = sol.rabi_frequency() / pt.mu;
            pt.speed_ratio = splitting_speed_factor(sol);
            pt.collapse_ratio = 1.0 / std::abs(rabi_frequency_mu_derivative(p));
            pt.mean_square_polarization = phase_averaged_polarization(sol, Vec3::UnitZ());
            pt.ok = true;
        } catch (const Error& e) {
            pt.ok = false;
            pt.error = e.name();
        }
        return pt;
    });
}

}  // namespace rabi::resonance
