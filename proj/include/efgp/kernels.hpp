#pragma once

#include <span>
#include <string>

namespace efgp {

enum class KernelFamily { squared_exponential, matern };

/// Translation-invariant isotropic covariance kernel normalized to k(0) = 1.
///
/// The squared-exponential kernel is exp(-|x|^2 / 2 l^2).  The Matern kernel
/// with smoothness nu is (2^{1-nu}/Gamma(nu)) z^nu K_nu(z) with
/// z = sqrt(2 nu) |x| / l.  Smoothness below 1/2 is rejected.
struct KernelSpec {
    KernelFamily family = KernelFamily::squared_exponential;
    double lengthscale = 0.1;
    double nu = 0.5;  // Matern only

    [[nodiscard]] static KernelSpec squared_exponential(double lengthscale);
    [[nodiscard]] static KernelSpec matern(double nu, double lengthscale);

    /// Throws std::invalid_argument when the parameters are not admissible.
    void validate() const;

    [[nodiscard]] bool is_matern() const { return family == KernelFamily::matern; }
    [[nodiscard]] std::string name() const;
};

/// k as a function of the Euclidean radius r = |x|.
[[nodiscard]] double kernel_radial(const KernelSpec& spec, double r);

/// k(x).  Throws std::domain_error on non-finite input.
[[nodiscard]] double kernel_eval(const KernelSpec& spec, std::span<const double> x);

/// Spectral density k^(xi) in dimension d as a function of rho = |xi|.
[[nodiscard]] double spectral_radial(const KernelSpec& spec, double rho, int d);

/// k^(xi) with d = xi.size(), using the e^{-2 pi i <xi, x>} transform convention.
[[nodiscard]] double kernel_spectral(const KernelSpec& spec, std::span<const double> xi);

/// Modified Bessel function of the second kind K_nu(z), nu >= 0, z > 0.
/// Underflows to zero for very large z.
[[nodiscard]] double bessel_k(double nu, double z);

/// e^z K_nu(z); finite wherever bessel_k would underflow.
[[nodiscard]] double bessel_k_scaled(double nu, double z);

/// log K_nu(z), computed from the scaled function so it stays finite for large z.
[[nodiscard]] double log_bessel_k(double nu, double z);

/// f_nu(z) = z^nu K_nu(z).  Monotonically decreasing in z.
[[nodiscard]] double f_nu(double nu, double z);

/// Limit of f_nu(z) as z -> 0, 2^{nu-1} Gamma(nu).
[[nodiscard]] double f_nu_at_zero(double nu);

}  // namespace efgp
