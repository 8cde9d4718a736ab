#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "qdress/dynamics.hpp"
#include "qdress/fft.hpp"

namespace qdress {

/// Emission intensity on (energy, scan-parameter) or (energy, time) grids.
/// Energies are absolute (laser carrier plus rotating-frame offset). The
/// intensity normalization is photons per meV, so integrating a fully
/// time-integrated spectrum over energy gives the emitted photon number.
struct SpectrumMap {
    std::vector<double> energy_grid;  // meV, absolute
    std::vector<double> axis2;        // scan parameter or time
    std::string axis2_label = "row";
    Eigen::MatrixXd intensity;        // rows = axis2, cols = energy

    // Diagnostics filled by the transforms.
    double photon_number = 0.0;       // full-band integral of the final/only row
    double carrier = 0.0;             // meV

    Eigen::Index rows() const { return intensity.rows(); }
    Eigen::Index cols() const { return intensity.cols(); }
};

namespace detail {

struct BandSpectrum {
    std::vector<double> acc;  // accumulated Re transform per FFT bin, 1/(pi hbar) applied late
    std::size_t n_fft = 0;
    double dtau = 0.0;

    double band_integral() const {
        // Sum over the full Nyquist comb; bin width 2 pi hbar / (n_fft dtau).
        double s = 0.0;
        for (double v : acc) s += v;
        return s * 2.0 * M_PI * hbar_mev_ps / (static_cast<double>(n_fft) * dtau) / (M_PI * hbar_mev_ps);
    }

    /// Linear interpolation at rotating-frame energy offset e (meV).
    double at_offset(double e) const {
        const double omega = e / hbar_mev_ps;  // rad/ps
        double frac = omega * static_cast<double>(n_fft) * dtau / (2.0 * M_PI);
        // Wrap into [0, n_fft).
        frac -= std::floor(frac / static_cast<double>(n_fft)) * static_cast<double>(n_fft);
        const std::size_t k0 = static_cast<std::size_t>(frac) % n_fft;
        const std::size_t k1 = (k0 + 1) % n_fft;
        const double w = frac - std::floor(frac);
        return ((1.0 - w) * acc[k0] + w * acc[k1]) / (M_PI * hbar_mev_ps);
    }
};

inline std::vector<double> trapezoid_weights(const std::vector<double>& grid) {
    std::vector<double> w(grid.size(), 0.0);
    if (grid.size() < 2) return w;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double left = (i == 0) ? grid[0] : grid[i - 1];
        const double right = (i + 1 == grid.size()) ? grid.back() : grid[i + 1];
        w[i] = 0.5 * (right - left);
    }
    return w;
}

inline void check_nyquist(const TwoTimeGrid& g1, const std::vector<double>& energy_grid, double carrier) {
    const double dtau = g1.tau_spacing();
    const double e_nyq = M_PI * hbar_mev_ps / dtau;
    for (double e : energy_grid) {
        if (std::abs(e - carrier) > e_nyq)
            throw GridTooCoarse("energy offset " + std::to_string(e - carrier) +
                                " meV exceeds the tau-grid Nyquist limit " + std::to_string(e_nyq) + " meV");
    }
}

}  // namespace detail

/// Fully time-integrated emission spectrum from G1 samples:
/// S(E) = (1/pi hbar) Re sum_t' dt' sum_tau dtau G1(t',tau) exp(-i E tau / hbar),
/// evaluated by zero-padded FFT over tau and interpolated onto energy_grid.
/// The full-band integral (photon_number) equals the time-integrated flux
/// captured by the grid.
inline SpectrumMap integrated_spectrum(const TwoTimeGrid& g1, const std::vector<double>& energy_grid,
                                       double carrier) {
    if (energy_grid.empty()) throw std::invalid_argument("integrated_spectrum: empty energy grid");
    if (!g1.tau_uniform()) throw NonUniformGrid("integrated_spectrum: tau grid must be uniform");
    detail::check_nyquist(g1, energy_grid, carrier);

    const std::size_t n_tau = g1.tau_grid.size();
    const double dtau = g1.tau_spacing();
    const std::size_t n_fft = next_pow2(4 * n_tau);
    const auto wt = detail::trapezoid_weights(g1.t_grid);

    std::vector<complexd> work(n_fft);
    detail::BandSpectrum band;
    band.n_fft = n_fft;
    band.dtau = dtau;
    band.acc.assign(n_fft, 0.0);
    std::vector<complexd> row_sum(n_tau, complexd(0.0, 0.0));
    for (std::size_t i = 0; i < g1.t_grid.size(); ++i)
        for (std::size_t j = 0; j < n_tau; ++j) row_sum[j] += wt[i] * g1.values(i, j);
    for (std::size_t j = 0; j < n_tau; ++j) {
        const double wtau = (j == 0 || j + 1 == n_tau) ? 0.5 * dtau : dtau;
        work[j] = row_sum[j] * wtau;
    }
    std::fill(work.begin() + static_cast<long>(n_tau), work.end(), complexd(0.0, 0.0));
    fft_inplace(work);
    for (std::size_t k = 0; k < n_fft; ++k) band.acc[k] = work[k].real();

    SpectrumMap map;
    map.energy_grid = energy_grid;
    map.axis2 = {0.0};
    map.axis2_label = "integrated";
    map.carrier = carrier;
    map.intensity.resize(1, static_cast<Eigen::Index>(energy_grid.size()));
    for (std::size_t c = 0; c < energy_grid.size(); ++c)
        map.intensity(0, static_cast<Eigen::Index>(c)) = band.at_offset(energy_grid[c] - carrier);
    map.photon_number = band.band_integral();
    return map;
}

/// Time-dependent (accumulated) emission spectrum
/// S(E, t) = (1/pi hbar) Re int_{-inf}^{t} dt' int_0^{t-t'} dtau G1 e^{-iE tau/hbar}.
/// Requires equal t and tau spacing: the triangular support mask then slices
/// into anti-diagonals t' + tau = const, each handled by one FFT. Rows are
/// emitted for accumulation times up to t_upper; the final row at
/// t = t_end + tau_end equals the integrated spectrum on the same grid.
inline SpectrumMap time_dependent_spectrum(const TwoTimeGrid& g1, const std::vector<double>& energy_grid,
                                           double t_upper, double carrier, std::size_t row_stride = 1) {
    if (energy_grid.empty()) throw std::invalid_argument("time_dependent_spectrum: empty energy grid");
    if (!g1.tau_uniform()) throw NonUniformGrid("time_dependent_spectrum: tau grid must be uniform");
    const double dtau = g1.tau_spacing();
    if (g1.t_grid.size() < 2) throw std::invalid_argument("time_dependent_spectrum: t grid too small");
    const double dt = g1.t_grid[1] - g1.t_grid[0];
    for (std::size_t i = 1; i < g1.t_grid.size(); ++i)
        if (std::abs(g1.t_grid[i] - g1.t_grid[i - 1] - dt) > 1e-9)
            throw NonUniformGrid("time_dependent_spectrum: t grid must be uniform");
    if (std::abs(dt - dtau) > 1e-9 * std::max(dt, dtau))
        throw NonUniformGrid("time_dependent_spectrum: t and tau spacing must match");
    detail::check_nyquist(g1, energy_grid, carrier);
    if (row_stride == 0) row_stride = 1;

    const std::size_t n_t = g1.t_grid.size();
    const std::size_t n_tau = g1.tau_grid.size();
    const std::size_t n_diag = n_t + n_tau - 1;
    const std::size_t n_fft = next_pow2(4 * n_tau);

    SpectrumMap map;
    map.energy_grid = energy_grid;
    map.axis2_label = "time_ps";
    map.carrier = carrier;

    std::vector<double> acc(n_fft, 0.0);
    std::vector<complexd> work(n_fft);
    std::vector<std::vector<double>> rows;
    std::vector<double> row_times;

    detail::BandSpectrum band;
    band.n_fft = n_fft;
    band.dtau = dtau;
    for (std::size_t k = 0; k < n_diag; ++k) {
        std::fill(work.begin(), work.end(), complexd(0.0, 0.0));
        const std::size_t j_lo = (k + 1 > n_t) ? k + 1 - n_t : 0;
        const std::size_t j_hi = std::min(n_tau - 1, k);
        for (std::size_t j = j_lo; j <= j_hi; ++j) {
            const std::size_t i = k - j;
            const double wt = (i == 0 || i + 1 == n_t) ? 0.5 * dt : dt;
            const double wtau = (j == 0 || j + 1 == n_tau) ? 0.5 * dtau : dtau;
            work[j] = wt * wtau * g1.values(i, j);
        }
        fft_inplace(work);
        for (std::size_t b = 0; b < n_fft; ++b) acc[b] += work[b].real();

        const double s_time = g1.t_grid.front() + static_cast<double>(k) * dt;
        const bool last = (k + 1 == n_diag);
        if (s_time <= t_upper + 1e-9 && (k % row_stride == 0 || last)) {
            band.acc = acc;
            std::vector<double> row(energy_grid.size());
            for (std::size_t c = 0; c < energy_grid.size(); ++c) row[c] = band.at_offset(energy_grid[c] - carrier);
            rows.push_back(std::move(row));
            row_times.push_back(s_time);
        }
    }
    band.acc = acc;
    map.photon_number = band.band_integral();

    map.axis2 = row_times;
    map.intensity.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(energy_grid.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < energy_grid.size(); ++c)
            map.intensity(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    return map;
}

// ---- sensor formalism ---------------------------------------------------------

/// Weakly coupled two-level detector: energy is the absolute filter energy in
/// meV, linewidth the FWHM-style sensor decay (meV), coupling the coherent
/// hook-up (meV). The perturbative regime demands coupling <= linewidth/100.
struct SensorConfig {
    double sensor_energy = 1352.0;  // meV, absolute
    double linewidth = 0.05;        // meV
    double coupling = 0.05 / 1000.0;  // meV

    void validate() const {
        if (!(linewidth > 0.0)) throw std::invalid_argument("SensorConfig: linewidth must be > 0");
        if (!(coupling > 0.0)) throw std::invalid_argument("SensorConfig: coupling must be > 0");
        if (coupling > linewidth / 100.0)
            throw CouplingTooStrong("SensorConfig: coupling " + std::to_string(coupling) +
                                    " meV exceeds linewidth/100; sensor would back-act");
    }
};

using Matrix8cd = Eigen::Matrix<complexd, 8, 8>;

/// QD (x) sensor generator. The sensor level sits at the rotating-frame offset
/// of its absolute energy; it couples to the V-polarized dipole and decays at
/// linewidth/hbar.
inline LindbladGenerator<8> make_sensor_generator(const SystemParameters& params, const DriveField& drive,
                                                  const SensorConfig& sensor, const ModelOptions& opts = {}) {
    sensor.validate();
    auto base = make_generator(params, drive, opts);
    const Eigen::Matrix2cd id2 = Eigen::Matrix2cd::Identity();
    Eigen::Matrix2cd lower = Eigen::Matrix2cd::Zero();
    lower(0, 1) = 1.0;  // sensor |0><1|
    const Eigen::Matrix2cd number = lower.adjoint() * lower;

    auto lift_qd = [&](const Matrix4cd& a) {
        Matrix8cd out = Matrix8cd::Zero();
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) out.block(2 * i, 2 * j, 2, 2) = a(i, j) * id2;
        return out;
    };
    auto lift_sensor = [&](const Eigen::Matrix2cd& b) {
        Matrix8cd out = Matrix8cd::Zero();
        for (int i = 0; i < 4; ++i) out.block(2 * i, 2 * i, 2, 2) = b;
        return out;
    };
    auto lift_both = [&](const Matrix4cd& a, const Eigen::Matrix2cd& b) {
        Matrix8cd out = Matrix8cd::Zero();
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) out.block(2 * i, 2 * j, 2, 2) = a(i, j) * b;
        return out;
    };

    LindbladGenerator<8> gen;
    const double offset = sensor.sensor_energy - params.laser_carrier(drive.laser_detuning);
    const Matrix4cd sigma_v = polarization_operator(Polarization::V);
    gen.h0 = lift_qd(base.h0) + offset * lift_sensor(number) +
             sensor.coupling * (lift_both(sigma_v, lower.adjoint()) + lift_both(sigma_v.adjoint(), lower));
    gen.h_coupling = lift_qd(base.h_coupling);
    gen.envelope = base.envelope;
    for (const auto& ch : base.channels) {
        Matrix8cd op = lift_qd(ch.op);
        gen.channels.push_back({op, ch.rate, op.adjoint() * op});
    }
    Matrix8cd sdecay = lift_sensor(lower);
    gen.channels.push_back({sdecay, sensor.linewidth / hbar_mev_ps, sdecay.adjoint() * sdecay});
    return gen;
}

/// Time-resolved filtered emission: population of the sensor level versus t.
inline std::vector<double> sensor_emission(const SystemParameters& params, const DriveField& drive,
                                           const SensorConfig& sensor, const std::vector<double>& t_grid,
                                           double tol = 1e-12) {
    auto gen = make_sensor_generator(params, drive, sensor);
    IntegratorOptions opt;
    opt.tol = tol;
    opt.max_step = default_max_step(drive);
    Matrix8cd rho0 = Matrix8cd::Zero();
    rho0(0, 0) = 1.0;  // |G> (x) |0>
    std::vector<double> pop(t_grid.size(), 0.0);
    integrate_sampled(gen, rho0, t_grid.front(), t_grid.back(), opt, t_grid,
                      [&](std::size_t k, double, const Matrix8cd& y) {
                          double v = 0.0;
                          for (int i = 0; i < 4; ++i) v += y(2 * i + 1, 2 * i + 1).real();
                          pop[k] = v;
                      });
    return pop;
}

/// Steady state of a time-independent generator (cw drive), via the kernel of
/// the vectorized Liouvillian.
template <int N>
Eigen::Matrix<complexd, N, N> steady_state(const LindbladGenerator<N>& gen, double t_probe = 0.0) {
    constexpr int M = N * N;
    const auto h = gen.hamiltonian(t_probe);
    Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(N, N);
    auto kron = [&](const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
        Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            for (Eigen::Index j = 0; j < a.cols(); ++j)
                out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        return out;
    };
    Eigen::MatrixXcd L = complexd(0.0, -1.0 / hbar_mev_ps) * (kron(id, h) - kron(h.transpose(), id));
    for (const auto& ch : gen.channels) {
        Eigen::MatrixXcd op = ch.op;
        Eigen::MatrixXcd n = ch.normal;
        L += ch.rate * (kron(op.conjugate(), op) - 0.5 * kron(id, n) - 0.5 * kron(n.transpose(), id));
    }
    // Least squares on the Liouvillian rows plus the trace constraint.
    Eigen::MatrixXcd a(M + 1, M);
    a.topRows(M) = L;
    a.row(M).setZero();
    for (int j = 0; j < N; ++j) a(M, j * N + j) = 1.0;
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(M + 1);
    rhs(M) = 1.0;
    Eigen::VectorXcd x = a.colPivHouseholderQr().solve(rhs);
    Eigen::Matrix<complexd, N, N> rho;
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) rho(i, j) = x(j * N + i);
    return 0.5 * (rho + rho.adjoint());
}

// ---- detector response --------------------------------------------------------

/// Discrete Gaussian convolution on a uniform time grid. The kernel is
/// normalized so the sample sum is preserved; sigma = 0 is the identity.
inline std::vector<double> irf_convolve(const std::vector<double>& times, const std::vector<double>& values,
                                        double sigma) {
    if (times.size() != values.size() || times.size() < 2)
        throw std::invalid_argument("irf_convolve: need matching grids with >= 2 samples");
    if (sigma < 0.0) throw std::invalid_argument("irf_convolve: sigma must be >= 0");
    const double h = times[1] - times[0];
    for (std::size_t i = 1; i < times.size(); ++i)
        if (std::abs(times[i] - times[i - 1] - h) > 1e-9 * std::max(1.0, std::abs(h)))
            throw NonUniformGrid("irf_convolve: time grid must be uniform");
    if (sigma == 0.0) return values;

    const long half = static_cast<long>(std::ceil(6.0 * sigma / h));
    std::vector<double> kernel(2 * half + 1);
    double norm = 0.0;
    for (long k = -half; k <= half; ++k) {
        const double u = static_cast<double>(k) * h / sigma;
        kernel[k + half] = std::exp(-0.5 * u * u);
        norm += kernel[k + half];
    }
    for (auto& v : kernel) v /= norm;

    const long n = static_cast<long>(values.size());
    std::vector<double> out(values.size(), 0.0);
    for (long i = 0; i < n; ++i) {
        double acc = 0.0;
        for (long k = -half; k <= half; ++k) {
            const long j = i - k;
            if (j >= 0 && j < n) acc += kernel[k + half] * values[j];
        }
        out[i] = acc;
    }
    return out;
}

}  // namespace qdress
