#include "rabi/errors.hpp"
#include "rabi/floquet.hpp"

#include <boost/numeric/odeint.hpp>

#include <array>
#include <cmath>

namespace rabi::floquet {

namespace {

using State = std::array<double, 9>;  // row-major 3x3 fundamental matrix

struct PrecessionRhs {
    const FloquetParams& params;

    void operator()(const State& x, State& dxdt, double t) const {
        const Mat3 m = precession_generator(params, t);
        const Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>> f(x.data());
        Eigen::Map<Eigen::Matrix<double, 3, 3, Eigen::RowMajor>> df(dxdt.data());
        df = m * f;
    }
};

}  // namespace

Mat3 monodromy_oracle(const FloquetParams& params, double t_end, int steps, double tol) {
    namespace odeint = boost::numeric::odeint;
    params.validate();
    if (steps < 1) throw ValidationError("monodromy_oracle: steps must be >= 1");

    State x{1, 0, 0, 0, 1, 0, 0, 0, 1};
    if (t_end == 0.0) return Mat3::Identity();

    auto stepper = odeint::make_controlled(tol, tol, odeint::runge_kutta_fehlberg78<State>());
    const double segment = t_end / steps;
    try {
        for (int i = 0; i < steps; ++i) {
            const double t0 = i * segment;
            const double t1 = (i + 1 == steps) ? t_end : t0 + segment;
            odeint::integrate_adaptive(stepper, PrecessionRhs{params}, x, t0, t1, 0.1 * (t1 - t0));
        }
    } catch (const std::exception& e) {
        throw IntegratorFailure(std::string("monodromy integration failed: ") + e.what());
    }

    Mat3 out = Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(x.data());
    const double drift = (out.transpose() * out - Mat3::Identity()).cwiseAbs().maxCoeff();
    if (!(drift < 1e-8)) throw IntegratorFailure("monodromy left the rotation group, drift " + std::to_string(drift));
    return out;
}

}  // namespace rabi::floquet
