#include "hybridoem/stability.hpp"

#include "hybridoem/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <sstream>

namespace hoem {

DriftMatrix linear_dynamics_matrix(const SystemParams& p, const DriveConfig& d, const SteadyState& ss) {
    (void)d;
    constexpr std::complex<double> I{0.0, 1.0};
    const auto a = ss.a_s, b = ss.b_s;
    const double wm = p.omega_m;
    DriftMatrix A = DriftMatrix::Zero();

    A(0, 0) = -(p.kappa_o + I * ss.Delta_o_eff);
    A(0, 4) = I * p.g_o * a;
    A(1, 1) = -(p.kappa_o - I * ss.Delta_o_eff);
    A(1, 4) = -I * p.g_o * std::conj(a);
    A(2, 2) = -(p.kappa_e + I * ss.Delta_e_eff);
    A(2, 4) = I * p.g_e * b;
    A(3, 3) = -(p.kappa_e - I * ss.Delta_e_eff);
    A(3, 4) = -I * p.g_e * std::conj(b);

    A(4, 5) = wm;
    A(5, 4) = -wm;
    A(5, 5) = -p.gamma_m;
    A(5, 0) = 2.0 * p.g_o * std::conj(a);
    A(5, 1) = 2.0 * p.g_o * a;
    A(5, 2) = 2.0 * p.g_e * std::conj(b);
    A(5, 3) = 2.0 * p.g_e * b;
    return A;
}

StabilityReport assess_stability(const SystemParams& p, const DriveConfig& d, const SteadyState& ss) {
    const DriftMatrix A = linear_dynamics_matrix(p, d, ss);
    Eigen::ComplexEigenSolver<DriftMatrix> solver(A, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
        std::ostringstream os;
        os << "eigenvalue iteration failed for drift matrix\n" << A;
        throw NumericalError(os.str());
    }
    StabilityReport r;
    const auto& ev = solver.eigenvalues();
    r.eigenvalues.assign(ev.data(), ev.data() + ev.size());
    std::sort(r.eigenvalues.begin(), r.eigenvalues.end(), [](const auto& x, const auto& y) {
        if (x.real() != y.real()) return x.real() > y.real();
        return x.imag() > y.imag();
    });
    r.margin = r.eigenvalues.front().real();
    r.stable = r.margin < 0.0;
    return r;
}

}  // namespace hoem
