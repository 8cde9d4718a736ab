#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

#include "qdress/integrator.hpp"
#include "qdress/parallel.hpp"
#include "qdress/system.hpp"

namespace qdress {

template <int N>
using MatrixNcd = Eigen::Matrix<complexd, N, N>;

/// Lindblad generator with a constant Hamiltonian part, a drive part scaled by
/// the real Rabi envelope, and a set of decay channels. Dimension N is 4 for
/// the bare cascade and 8 with an attached two-level sensor.
template <int N>
struct LindbladGenerator {
    MatrixNcd<N> h0 = MatrixNcd<N>::Zero();          // meV
    MatrixNcd<N> h_coupling = MatrixNcd<N>::Zero();  // meV per (rad/ps) of envelope
    std::function<double(double)> envelope;          // rad/ps
    struct Channel {
        MatrixNcd<N> op;
        double rate;          // 1/ps
        MatrixNcd<N> normal;  // op^dagger op, precomputed
    };
    std::vector<Channel> channels;

    MatrixNcd<N> hamiltonian(double t) const {
        if (!envelope) return h0;
        const double om = envelope(t);
        if (om == 0.0) return h0;
        return h0 + om * h_coupling;
    }

    MatrixNcd<N> operator()(double t, const MatrixNcd<N>& rho) const {
        const MatrixNcd<N> h = hamiltonian(t);
        MatrixNcd<N> out = complexd(0.0, -1.0 / hbar_mev_ps) * (h * rho - rho * h);
        for (const auto& ch : channels) {
            out.noalias() += ch.rate * (ch.op * rho * ch.op.adjoint());
            out.noalias() -= (0.5 * ch.rate) * (ch.normal * rho + rho * ch.normal);
        }
        return out;
    }
};

struct ModelOptions {
    bool decouple_xx = false;  // two-level reduction: drop the X <-> XX coupling
    bool no_decay = false;     // decoherence-free dynamics (phase extraction)
};

inline LindbladGenerator<4> make_generator(const SystemParameters& params, const DriveField& drive,
                                           const ModelOptions& opts = {}) {
    params.validate();
    drive.validate();
    LindbladGenerator<4> gen;
    DriveField zero = drive;
    zero.pulse_area = 0.0;
    zero.rabi_amplitude = 0.0;
    gen.h0 = build_hamiltonian(params, zero, 0.0);
    Matrix4cd sigma_l = drive.alpha_h * polarization_operator(Polarization::H) +
                        drive.alpha_v * polarization_operator(Polarization::V);
    if (opts.decouple_xx) {
        sigma_l.col(kXX).setZero();
        sigma_l.row(kXX).setZero();
    }
    gen.h_coupling = -0.5 * hbar_mev_ps * (sigma_l + sigma_l.adjoint());
    gen.envelope = [drive](double t) { return rabi_envelope(drive, t); };
    if (!opts.no_decay) {
        for (const auto& c : collapse_operators(params)) {
            gen.channels.push_back({c.op, c.rate, c.op.adjoint() * c.op});
        }
    }
    return gen;
}

/// Default step cap: resolve the pulse envelope so the stepper cannot leap
/// over it from the flat pre-pulse region.
inline double default_max_step(const DriveField& drive) {
    if (drive.kind == DriveKind::gaussian_pulse && drive.pulse_area > 0.0) return drive.tau_field() / 4.0;
    return std::numeric_limits<double>::infinity();
}

/// Time-sampled Lindblad evolution of the four-level system.
struct Trajectory {
    std::vector<double> times;
    std::vector<Matrix4cd> states;

    double population(std::size_t k, int level) const { return states[k](level, level).real(); }
    std::vector<double> population_series(int level) const {
        std::vector<double> out(states.size());
        for (std::size_t k = 0; k < states.size(); ++k) out[k] = population(k, level);
        return out;
    }
    double max_trace_defect() const {
        double worst = 0.0;
        for (const auto& s : states) worst = std::max(worst, trace_defect(s));
        return worst;
    }
    double min_state_eigenvalue() const {
        double worst = 0.0;
        for (const auto& s : states) worst = std::min(worst, min_eigenvalue(s));
        return worst;
    }
};

inline std::vector<double> uniform_grid(double t0, double t1, std::size_t n) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(n - 1);
    g.back() = t1;
    return g;
}

inline Trajectory propagate_sampled(const LindbladGenerator<4>& gen, Matrix4cd rho0,
                                    const std::vector<double>& sample_times, const IntegratorOptions& opt) {
    Trajectory traj;
    traj.times = sample_times;
    traj.states.resize(sample_times.size());
    integrate_sampled(
        gen, std::move(rho0), sample_times.front(), sample_times.back(), opt, sample_times,
        [&](std::size_t k, double, const Matrix4cd& y) { traj.states[k] = y; });
    return traj;
}

/// Lindblad propagation of rho0 over [t0, t1] with local error below tol.
inline Trajectory propagate(const SystemParameters& params, const DriveField& drive, const Matrix4cd& rho0,
                            double t0, double t1, double tol = 1e-10, std::size_t n_samples = 0) {
    if (!(t1 > t0)) throw std::invalid_argument("propagate: t1 must be > t0");
    if (!(tol > 0.0)) throw std::invalid_argument("propagate: tol must be > 0");
    validate_density(rho0, 1e-10, 1e-8, -1e-9);
    auto gen = make_generator(params, drive);
    IntegratorOptions opt;
    opt.tol = tol;
    opt.max_step = default_max_step(drive);
    if (n_samples == 0) n_samples = std::max<std::size_t>(400, static_cast<std::size_t>((t1 - t0) * 4.0));
    return propagate_sampled(gen, rho0, uniform_grid(t0, t1, n_samples), opt);
}

// ---- two-time correlations --------------------------------------------------

/// Which operator enters G1 = <op^dagger(t+tau) op(t)>.
/// `emission` weights each cascade arm by the square root of its decay rate,
/// so G1(t,0) is the photon flux and spectra integrate to photon numbers;
/// `bare` uses the plain polarization operator sigma_H/V.
struct CorrelatorOp {
    Matrix4cd op;
    enum class Kind { emission, bare } kind;
    Polarization pol;

    static CorrelatorOp emission(const SystemParameters& params, Polarization pol) {
        return {emission_operator(params, pol), Kind::emission, pol};
    }
    static CorrelatorOp bare(Polarization pol) { return {polarization_operator(pol), Kind::bare, pol}; }
};

/// G1(t, tau) samples on a t x tau lattice. values(i, j) = G1(t_i, tau_j).
struct TwoTimeGrid {
    std::vector<double> t_grid;
    std::vector<double> tau_grid;
    Eigen::MatrixXcd values;

    double tau_spacing() const {
        if (tau_grid.size() < 2) return 0.0;
        return tau_grid[1] - tau_grid[0];
    }
    bool tau_uniform(double rel_tol = 1e-9) const {
        if (tau_grid.size() < 2) return true;
        const double d = tau_spacing();
        for (std::size_t j = 1; j < tau_grid.size(); ++j)
            if (std::abs(tau_grid[j] - tau_grid[j - 1] - d) > rel_tol * std::max(1.0, std::abs(d))) return false;
        return true;
    }
};

struct CorrelationOptions {
    double tol = 1e-10;
    Matrix4cd rho0 = ground_state();
    bool parallel = true;
};

/// Quantum-regression evaluation of G1 on the grid: for each t, the post-jump
/// operator op * rho(t) is evolved forward in tau under the full
/// time-dependent generator (the pulse may still be on at t + tau).
inline TwoTimeGrid correlation_g1(const SystemParameters& params, const DriveField& drive,
                                  const std::vector<double>& t_grid, const std::vector<double>& tau_grid,
                                  const CorrelatorOp& op, const CorrelationOptions& copt = {}) {
    if (t_grid.size() < 2 || tau_grid.empty()) throw std::invalid_argument("correlation_g1: empty grids");
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (!(t_grid[i] > t_grid[i - 1])) throw std::invalid_argument("correlation_g1: t_grid must be increasing");
    for (std::size_t j = 1; j < tau_grid.size(); ++j)
        if (!(tau_grid[j] > tau_grid[j - 1]))
            throw std::invalid_argument("correlation_g1: tau_grid must be increasing");
    if (std::abs(tau_grid.front()) > 1e-12) throw std::invalid_argument("correlation_g1: tau_grid must start at 0");

    auto gen = make_generator(params, drive);
    IntegratorOptions opt;
    opt.tol = copt.tol;
    opt.max_step = default_max_step(drive);

    Trajectory traj = propagate_sampled(gen, copt.rho0, t_grid, opt);

    TwoTimeGrid g1;
    g1.t_grid = t_grid;
    g1.tau_grid = tau_grid;
    g1.values.resize(t_grid.size(), tau_grid.size());
    const Matrix4cd op_dag = op.op.adjoint();

    auto row_job = [&](std::size_t i) {
        const double t_i = t_grid[i];
        Matrix4cd x = op.op * traj.states[i];
        auto shifted = [&](double tau, const Matrix4cd& y) { return gen(t_i + tau, y); };
        integrate_sampled(shifted, std::move(x), 0.0, tau_grid.back(), opt, tau_grid,
                          [&](std::size_t j, double, const Matrix4cd& y) {
                              g1.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                                  (op_dag * y).trace();
                          });
    };
    if (copt.parallel)
        parallel_for(t_grid.size(), row_job);
    else
        for (std::size_t i = 0; i < t_grid.size(); ++i) row_job(i);
    return g1;
}

// ---- pulse-area scans ---------------------------------------------------------

struct RabiScanPoint {
    double tau = 0.0;          // ps
    double theta = 0.0;        // rad
    double sqrt_power = 0.0;   // theta / sqrt(tau), arbitrary units
    double final_xx = 0.0;     // XX population just after the pulse
    double xx_emission = 0.0;  // gamma_xx * integral of the XX population (photons)
};

/// Final-state and emission scan over pulse areas for each pulse duration.
/// The time-integrated XX emission adds the analytic post-window decay tail
/// gamma_xx * P_XX(t_end) * tau_XX, so the window only needs to cover the pulse.
inline std::vector<RabiScanPoint> rabi_scan(const SystemParameters& params, const std::vector<double>& tau_list,
                                            const std::vector<double>& theta_grid, double tol = 1e-9,
                                            std::size_t n_samples = 801) {
    if (tau_list.empty() || theta_grid.empty()) throw std::invalid_argument("rabi_scan: empty grids");
    std::vector<RabiScanPoint> table(tau_list.size() * theta_grid.size());
    parallel_for(table.size(), [&](std::size_t idx) {
        const double tau = tau_list[idx / theta_grid.size()];
        const double theta = theta_grid[idx % theta_grid.size()];
        RabiScanPoint pt;
        pt.tau = tau;
        pt.theta = theta;
        pt.sqrt_power = theta / std::sqrt(tau);
        if (theta == 0.0) {
            table[idx] = pt;
            return;
        }
        DriveField drive = DriveField::pulse(theta, tau);
        const double t0 = -4.0 * tau, t1 = 4.0 * tau;
        const std::size_t n = n_samples;
        Trajectory traj = propagate(params, drive, ground_state(), t0, t1, tol, n);
        pt.final_xx = traj.population(n - 1, kXX);
        double integral = 0.0;
        for (std::size_t k = 1; k < n; ++k) {
            const double dt = traj.times[k] - traj.times[k - 1];
            integral += 0.5 * dt * (traj.population(k, kXX) + traj.population(k - 1, kXX));
        }
        integral += pt.final_xx / params.gamma_xx;  // exponential tail
        pt.xx_emission = params.gamma_xx * integral;
        table[idx] = pt;
    });
    return table;
}

}  // namespace qdress
