#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "qdress/errors.hpp"

namespace qdress {

struct IntegratorOptions {
    double tol = 1e-10;       // local error target, used as absolute and relative
    double max_step = std::numeric_limits<double>::infinity();  // ps
    double min_step = 1e-6;   // ps; going below raises StepUnderflow
    double initial_step = 0.0;  // 0 = choose automatically
};

/// Adaptive Dormand-Prince 5(4) driver for matrix-valued linear ODEs
/// dY/dt = rhs(t, Y). Integrates from t0 through an ascending list of sample
/// times (all within [t0, t1]), never stepping across a sample, and calls
/// on_sample(index, t, Y) at each one. Works for density matrices and for the
/// non-Hermitian operators propagated by the quantum regression theorem.
template <class Mat, class RHS, class Sampler>
void integrate_sampled(const RHS& rhs, Mat y, double t0, double t1, const IntegratorOptions& opt,
                       const std::vector<double>& samples, Sampler&& on_sample) {
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                        e6 = 22.0 / 525, e7 = -1.0 / 40;
    static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;

    const double atol = opt.tol, rtol = opt.tol;
    double t = t0;
    double h = opt.initial_step > 0.0 ? opt.initial_step : std::min({opt.max_step, (t1 - t0) / 100.0, 0.1});
    std::size_t next = 0;
    while (next < samples.size() && samples[next] <= t0 + 1e-14 * std::max(1.0, std::abs(t0))) {
        on_sample(next, t0, y);
        ++next;
    }

    Mat k1, k2, k3, k4, k5, k6, k7, ytmp, ynew, yerr;
    bool have_k1 = false;
    while (next < samples.size()) {
        const double target = samples[next];
        while (t < target - 1e-12 * std::max(1.0, std::abs(target))) {
            double step = std::min({h, opt.max_step, target - t});
            bool clipped = step < h;
            if (!have_k1) {
                k1 = rhs(t, y);
                have_k1 = true;
            }
            ytmp = y + step * (a21 * k1);
            k2 = rhs(t + c2 * step, ytmp);
            ytmp = y + step * (a31 * k1 + a32 * k2);
            k3 = rhs(t + c3 * step, ytmp);
            ytmp = y + step * (a41 * k1 + a42 * k2 + a43 * k3);
            k4 = rhs(t + c4 * step, ytmp);
            ytmp = y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
            k5 = rhs(t + c5 * step, ytmp);
            ytmp = y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
            k6 = rhs(t + step, ytmp);
            ynew = y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            k7 = rhs(t + step, ynew);
            yerr = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

            double err = 0.0;
            for (int i = 0; i < y.rows(); ++i) {
                for (int j = 0; j < y.cols(); ++j) {
                    const double scale = atol + rtol * std::max(std::abs(y(i, j)), std::abs(ynew(i, j)));
                    err = std::max(err, std::abs(yerr(i, j)) / scale);
                }
            }
            if (err <= 1.0) {
                t += step;
                y = ynew;
                k1 = k7;  // first-same-as-last
                const double grow = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
                double hnew = step * std::clamp(grow, 0.2, 5.0);
                if (!clipped || hnew > h) h = std::min(hnew, opt.max_step);
            } else {
                h = step * std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
                have_k1 = true;  // k1 still valid at unchanged (t, y)
            }
            if (h < opt.min_step)
                throw StepUnderflow("integrate_sampled: step " + std::to_string(h) + " ps below minimum at t = " +
                                    std::to_string(t));
        }
        on_sample(next, target, y);
        ++next;
    }
    (void)t1;
}

}  // namespace qdress
