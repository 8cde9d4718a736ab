#pragma once

#include <cmath>

namespace qdress {

// Unit conventions used throughout: energies in meV, times in ps, rates in 1/ps.
// Angular frequencies are stored as energies and divided by hbar at use sites.
inline constexpr double hbar_mev_ps = 0.6582119569;

/// Gaussian standard deviation -> full width at half maximum.
inline double fwhm_from_sigma(double sigma) { return 2.0 * std::sqrt(2.0 * std::log(2.0)) * sigma; }

/// Full width at half maximum -> Gaussian standard deviation.
inline double sigma_from_fwhm(double fwhm) { return fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0))); }

/// Field-envelope duration tau_field from the intensity FWHM tau of a Gaussian pulse.
/// The envelope exp(-t^2 / (2 tau_field^2)) squares to an intensity profile of
/// FWHM 2 sqrt(ln 2) tau_field, and its intensity autocorrelation has FWHM
/// 2 sqrt(2 ln 2) tau_field = sqrt(2) tau.
inline double tau_field_from_intensity_fwhm(double tau) { return tau / (2.0 * std::sqrt(std::log(2.0))); }

}  // namespace qdress
