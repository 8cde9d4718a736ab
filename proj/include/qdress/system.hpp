#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "qdress/errors.hpp"
#include "qdress/units.hpp"

namespace qdress {

using Matrix4cd = Eigen::Matrix4cd;
using complexd = std::complex<double>;

/// Basis ordering used everywhere: |G>, |X_H>, |X_V>, |XX|.
enum BareState : int { kG = 0, kXH = 1, kXV = 2, kXX = 3 };

enum class Polarization { H, V };

/// Physical constants of the four-level emitter.
/// Energies in meV, rates in 1/ps. exciton_energy is the mean of the two
/// exciton levels; the biexciton sits at 2*exciton_energy - binding_energy.
struct SystemParameters {
    double exciton_energy = 1354.1;  // hbar*omega_X
    double binding_energy = 2.1;     // E_b
    double fss = 0.0;                // delta, fine structure splitting
    double gamma_xx = 1.0 / 157.0;   // total biexciton radiative decay rate
    double gamma_x = 1.0 / 295.0;    // radiative decay rate per exciton state
    double dephasing = 0.0;          // optional Markovian pure dephasing

    void validate() const {
        if (!(binding_energy > 0.0)) throw std::invalid_argument("SystemParameters: binding_energy must be > 0");
        if (!(gamma_xx > 0.0)) throw std::invalid_argument("SystemParameters: gamma_xx must be > 0");
        if (!(gamma_x > 0.0)) throw std::invalid_argument("SystemParameters: gamma_x must be > 0");
        if (!(dephasing >= 0.0)) throw std::invalid_argument("SystemParameters: dephasing must be >= 0");
        if (!(std::abs(fss) < binding_energy))
            throw std::invalid_argument("SystemParameters: |fss| must be < binding_energy");
    }

    /// Laser carrier energy at detuning delta_l from the two-photon resonance.
    double laser_carrier(double laser_detuning) const {
        return exciton_energy - 0.5 * binding_energy + laser_detuning;
    }
    /// Bare XX -> X_V emission energy (absolute, meV).
    double xx_line_energy() const { return exciton_energy - binding_energy + 0.5 * fss; }
    /// Bare X_V -> G emission energy (absolute, meV).
    double x_line_energy() const { return exciton_energy - 0.5 * fss; }
};

enum class DriveKind { cw, gaussian_pulse };

/// Laser drive in the frame rotating at the laser frequency. For pulses the
/// envelope is Gaussian with area pulse_area; tau_intensity_fwhm is the
/// intensity FWHM tau used in the figures. For cw, rabi_amplitude is the
/// constant Omega in rad/ps (configs give hbar*Omega in meV and divide here).
struct DriveField {
    DriveKind kind = DriveKind::gaussian_pulse;
    double pulse_area = 0.0;           // Theta, radians (pulsed)
    double rabi_amplitude = 0.0;       // Omega, rad/ps (cw)
    double tau_intensity_fwhm = 14.0;  // tau, ps (pulsed)
    double center_time = 0.0;          // pulse peak, ps
    double laser_detuning = 0.0;       // Delta_L, meV; 0 at two-photon resonance
    double alpha_h = 1.0;              // real polarization amplitudes
    double alpha_v = 0.0;

    void validate() const {
        const double norm = alpha_h * alpha_h + alpha_v * alpha_v;
        if (std::abs(norm - 1.0) > 1e-12)
            throw std::invalid_argument("DriveField: alpha_h^2 + alpha_v^2 must equal 1");
        if (kind == DriveKind::gaussian_pulse) {
            if (!(tau_intensity_fwhm > 0.0))
                throw std::invalid_argument("DriveField: tau_intensity_fwhm must be > 0");
            if (!(pulse_area >= 0.0)) throw std::invalid_argument("DriveField: pulse_area must be >= 0");
        }
        if (!std::isfinite(laser_detuning)) throw std::invalid_argument("DriveField: laser_detuning must be finite");
    }

    /// Gaussian field-envelope duration (ps).
    double tau_field() const { return tau_field_from_intensity_fwhm(tau_intensity_fwhm); }

    static DriveField cw(double hbar_omega_mev, double laser_detuning = 0.0, double alpha_h = 1.0,
                         double alpha_v = 0.0) {
        DriveField d;
        d.kind = DriveKind::cw;
        d.rabi_amplitude = hbar_omega_mev / hbar_mev_ps;
        d.laser_detuning = laser_detuning;
        d.alpha_h = alpha_h;
        d.alpha_v = alpha_v;
        return d;
    }
    static DriveField pulse(double theta, double tau_fwhm, double laser_detuning = 0.0, double center = 0.0,
                            double alpha_h = 1.0, double alpha_v = 0.0) {
        DriveField d;
        d.kind = DriveKind::gaussian_pulse;
        d.pulse_area = theta;
        d.tau_intensity_fwhm = tau_fwhm;
        d.laser_detuning = laser_detuning;
        d.center_time = center;
        d.alpha_h = alpha_h;
        d.alpha_v = alpha_v;
        return d;
    }
};

/// Instantaneous Rabi envelope Omega(t) in rad/ps. The optical carrier is
/// absorbed by the rotating frame; the envelope is real, with area Theta.
inline double rabi_envelope(const DriveField& drive, double t) {
    if (drive.kind == DriveKind::cw) return drive.rabi_amplitude;
    if (drive.pulse_area == 0.0) return 0.0;
    const double tf = drive.tau_field();
    const double u = (t - drive.center_time) / tf;
    return drive.pulse_area / (std::sqrt(2.0 * M_PI) * tf) * std::exp(-0.5 * u * u);
}

/// Polarization lowering operator sigma_H/V = |G><X_pol| + |X_pol><XX|.
inline Matrix4cd polarization_operator(Polarization pol) {
    Matrix4cd s = Matrix4cd::Zero();
    const int x = (pol == Polarization::H) ? kXH : kXV;
    s(kG, x) = 1.0;
    s(x, kXX) = 1.0;
    return s;
}

/// Rotating-frame Hamiltonian (meV). Diagonal (0, D+delta/2, D-delta/2, 2D-E_b)
/// with D = hbar*omega_X - hbar*omega_L = E_b/2 - laser_detuning, plus the
/// drive term -(hbar/2) Omega(t) (sigma_L + sigma_L^dagger).
inline Matrix4cd build_hamiltonian(const SystemParameters& params, const DriveField& drive, double t) {
    const double delta_rot = 0.5 * params.binding_energy - drive.laser_detuning;
    Matrix4cd h = Matrix4cd::Zero();
    h(kXH, kXH) = delta_rot + 0.5 * params.fss;
    h(kXV, kXV) = delta_rot - 0.5 * params.fss;
    h(kXX, kXX) = 2.0 * delta_rot - params.binding_energy;
    const double omega = rabi_envelope(drive, t);
    if (omega != 0.0) {
        Matrix4cd sigma_l = drive.alpha_h * polarization_operator(Polarization::H) +
                            drive.alpha_v * polarization_operator(Polarization::V);
        h -= 0.5 * hbar_mev_ps * omega * (sigma_l + sigma_l.adjoint());
    }
    return h;
}

/// One Lindblad channel: operator plus rate (1/ps).
struct CollapseOperator {
    Matrix4cd op;
    double rate;
};

/// Radiative cascade channels: each XX -> X_H/V branch at gamma_xx/2 (the
/// branching between the polarizations is symmetric, so the total XX decay
/// rate is gamma_xx), each X -> G at gamma_x. If dephasing > 0, projector
/// channels on the excited levels model Markovian pure dephasing.
inline std::vector<CollapseOperator> collapse_operators(const SystemParameters& params) {
    std::vector<CollapseOperator> ops;
    if (params.gamma_xx > 0.0) {
        Matrix4cd xx_to_xh = Matrix4cd::Zero();
        xx_to_xh(kXH, kXX) = 1.0;
        Matrix4cd xx_to_xv = Matrix4cd::Zero();
        xx_to_xv(kXV, kXX) = 1.0;
        ops.push_back({xx_to_xh, 0.5 * params.gamma_xx});
        ops.push_back({xx_to_xv, 0.5 * params.gamma_xx});
    }
    if (params.gamma_x > 0.0) {
        Matrix4cd xh_to_g = Matrix4cd::Zero();
        xh_to_g(kG, kXH) = 1.0;
        Matrix4cd xv_to_g = Matrix4cd::Zero();
        xv_to_g(kG, kXV) = 1.0;
        ops.push_back({xh_to_g, params.gamma_x});
        ops.push_back({xv_to_g, params.gamma_x});
    }
    if (params.dephasing > 0.0) {
        for (int level : {kXH, kXV, kXX}) {
            Matrix4cd proj = Matrix4cd::Zero();
            proj(level, level) = 1.0;
            ops.push_back({proj, params.dephasing});
        }
    }
    return ops;
}

/// Rate-weighted emission operator for one detection polarization:
/// sqrt(gamma_xx/2) |X_pol><XX| + sqrt(gamma_x) |G><X_pol|.
/// Its normal-ordered expectation is the instantaneous photon flux (1/ps)
/// into that polarization, which makes spectra integrate to photon numbers.
inline Matrix4cd emission_operator(const SystemParameters& params, Polarization pol) {
    Matrix4cd s = Matrix4cd::Zero();
    const int x = (pol == Polarization::H) ? kXH : kXV;
    s(x, kXX) = std::sqrt(0.5 * params.gamma_xx);
    s(kG, x) = std::sqrt(params.gamma_x);
    return s;
}

// ---- density-matrix helpers -------------------------------------------------

inline Matrix4cd ground_state() {
    Matrix4cd rho = Matrix4cd::Zero();
    rho(kG, kG) = 1.0;
    return rho;
}

inline Matrix4cd biexciton_state() {
    Matrix4cd rho = Matrix4cd::Zero();
    rho(kXX, kXX) = 1.0;
    return rho;
}

template <class Mat>
double hermiticity_defect(const Mat& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

template <class Mat>
double trace_defect(const Mat& rho) {
    return std::abs(rho.trace() - complexd(1.0, 0.0));
}

template <class Mat>
double min_eigenvalue(const Mat& rho) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

/// Throws if rho is not a valid density matrix within the stated tolerances.
template <class Mat>
void validate_density(const Mat& rho, double herm_tol = 1e-10, double trace_tol = 1e-8, double eig_floor = -1e-9) {
    if (hermiticity_defect(rho) > herm_tol) throw std::invalid_argument("density matrix not Hermitian");
    if (trace_defect(rho) > trace_tol) throw std::invalid_argument("density matrix trace != 1");
    if (min_eigenvalue(rho) < eig_floor) throw std::invalid_argument("density matrix not positive semidefinite");
}

}  // namespace qdress
