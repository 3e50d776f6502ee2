#include "efgp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace efgp {

namespace {

constexpr double kPi = std::numbers::pi;

void require_finite(std::span<const double> x, const char* what) {
    for (double v : x) {
        if (!std::isfinite(v)) {
            throw std::domain_error(std::string(what) + ": non-finite coordinate");
        }
    }
}

double norm2(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) {
        s += v * v;
    }
    return std::sqrt(s);
}

// Half-integer Matern kernels in closed form: exp(-z) times a polynomial in z.
bool matern_closed_form(double nu, double z, double& out) {
    if (nu == 0.5) {
        out = std::exp(-z);
        return true;
    }
    if (nu == 1.5) {
        out = (1.0 + z) * std::exp(-z);
        return true;
    }
    if (nu == 2.5) {
        out = (1.0 + z + z * z / 3.0) * std::exp(-z);
        return true;
    }
    return false;
}

// log of the Matern spectral prefactor 2^d pi^{d/2} (2 nu)^nu Gamma(nu + d/2) / Gamma(nu).
double log_matern_chat(double nu, int d) {
    return d * std::numbers::ln2 + 0.5 * d * std::log(kPi) + nu * std::log(2.0 * nu) +
           std::lgamma(nu + 0.5 * d) - std::lgamma(nu);
}

}  // namespace

KernelSpec KernelSpec::squared_exponential(double lengthscale) {
    KernelSpec s;
    s.family = KernelFamily::squared_exponential;
    s.lengthscale = lengthscale;
    s.validate();
    return s;
}

KernelSpec KernelSpec::matern(double nu, double lengthscale) {
    KernelSpec s;
    s.family = KernelFamily::matern;
    s.nu = nu;
    s.lengthscale = lengthscale;
    s.validate();
    return s;
}

void KernelSpec::validate() const {
    if (!(lengthscale > 0.0) || !std::isfinite(lengthscale)) {
        throw std::invalid_argument("kernel lengthscale must be finite and > 0");
    }
    if (family == KernelFamily::matern && (!(nu >= 0.5) || !std::isfinite(nu))) {
        throw std::invalid_argument("Matern smoothness nu must be finite and >= 1/2");
    }
}

std::string KernelSpec::name() const {
    std::ostringstream os;
    if (family == KernelFamily::squared_exponential) {
        os << "se(l=" << lengthscale << ")";
    } else {
        os << "matern(nu=" << nu << ",l=" << lengthscale << ")";
    }
    return os.str();
}

double kernel_radial(const KernelSpec& spec, double r) {
    if (!std::isfinite(r)) {
        throw std::domain_error("kernel_radial: non-finite radius");
    }
    r = std::abs(r);
    const double l = spec.lengthscale;
    if (spec.family == KernelFamily::squared_exponential) {
        const double t = r / l;
        return std::exp(-0.5 * t * t);
    }
    if (r == 0.0) {
        return 1.0;
    }
    const double nu = spec.nu;
    const double z = std::sqrt(2.0 * nu) * r / l;
    double closed = 0.0;
    if (matern_closed_form(nu, z, closed)) {
        return closed;
    }
    // Below this the 1 - O(z^{2 min(nu,1)}) behaviour is lost to rounding anyway.
    if (z < 1e-300) {
        return 1.0;
    }
    const double log_k = (1.0 - nu) * std::numbers::ln2 - std::lgamma(nu) + nu * std::log(z) +
                         log_bessel_k(nu, z);
    return std::min(1.0, std::exp(log_k));
}

double kernel_eval(const KernelSpec& spec, std::span<const double> x) {
    require_finite(x, "kernel_eval");
    return kernel_radial(spec, norm2(x));
}

double spectral_radial(const KernelSpec& spec, double rho, int d) {
    if (!std::isfinite(rho)) {
        throw std::domain_error("kernel_spectral: non-finite frequency");
    }
    if (d < 1 || d > 3) {
        throw std::invalid_argument("kernel_spectral: dimension must be 1, 2 or 3");
    }
    const double l = spec.lengthscale;
    if (spec.family == KernelFamily::squared_exponential) {
        const double a = kPi * l * rho;
        return std::pow(std::sqrt(2.0 * kPi) * l, d) * std::exp(-2.0 * a * a);
    }
    const double nu = spec.nu;
    const double a = 2.0 * kPi * l * rho;
    // c^ l^d (2 nu + (2 pi l rho)^2)^{-nu-d/2}, which integrates to k(0) = 1.
    const double log_val =
        log_matern_chat(nu, d) + d * std::log(l) - (nu + 0.5 * d) * std::log(2.0 * nu + a * a);
    return std::exp(log_val);
}

double kernel_spectral(const KernelSpec& spec, std::span<const double> xi) {
    require_finite(xi, "kernel_spectral");
    return spectral_radial(spec, norm2(xi), static_cast<int>(xi.size()));
}

}  // namespace efgp
