#include "efgp/kernels.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace efgp {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEps = 1e-17;
constexpr int kMaxIter = 100000;

// Taylor coefficients c_1..c_27 of 1/Gamma(z) about z = 0.
constexpr std::array<double, 27> kRecipGamma = {
    1.0,
    0.57721566490153286061,
    -0.65587807152025388108,
    -0.042002635034095235529,
    0.1665386113822914895,
    -0.042197734555544336748,
    -0.0096219715278769735621,
    0.0072189432466630995424,
    -0.0011651675918590651121,
    -0.00021524167411495097282,
    0.00012805028238811618615,
    -0.000020134854780788238656,
    -1.2504934821426706573e-6,
    1.1330272319816958824e-6,
    -2.0563384169776071035e-7,
    6.1160951044814158179e-9,
    5.0020076444692229301e-9,
    -1.1812745704870201446e-9,
    1.0434267116911005105e-10,
    7.782263439905071254e-12,
    -3.6968056186422057082e-12,
    5.100370287454475979e-13,
    -2.0583260535665067832e-14,
    -5.3481225394230179824e-15,
    1.2267786282382607902e-15,
    -1.1812593016974587695e-16,
    1.1866922547516003326e-18,
};

// Gamma-function combinations used by Temme's series, valid for |mu| <= 1/2:
//   gam1 = (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu)
//   gam2 = (1/Gamma(1-mu) + 1/Gamma(1+mu)) / 2
struct TemmeGammas {
    double gam1;
    double gam2;
    double gampl;  // 1/Gamma(1+mu)
    double gammi;  // 1/Gamma(1-mu)
};

TemmeGammas temme_gammas(double mu) {
    // 1/Gamma(1+x) = sum_k c_k x^{k-1}; split into even and odd powers of mu.
    const double mu2 = mu * mu;
    double even = 0.0;  // sum over odd k of c_k mu^{k-1}
    double odd = 0.0;   // sum over even k of c_k mu^{k-2}
    for (int k = static_cast<int>(kRecipGamma.size()); k >= 1; --k) {
        if (k % 2 == 1) {
            even = even * mu2 + kRecipGamma[k - 1];
        } else {
            odd = odd * mu2 + kRecipGamma[k - 1];
        }
    }
    TemmeGammas g{};
    g.gam1 = -odd;
    g.gam2 = even;
    g.gampl = g.gam2 - mu * g.gam1;
    g.gammi = g.gam2 + mu * g.gam1;
    return g;
}

bool is_half_integer(double nu, int& n) {
    const double t = nu - 0.5;
    const double r = std::round(t);
    if (r >= 0.0 && r <= 40.0 && std::abs(t - r) < 1e-14) {
        n = static_cast<int>(r);
        return true;
    }
    return false;
}

// e^z K_{n+1/2}(z) = sqrt(pi/2z) sum_{k=0}^{n} (n+k)! / (k! (n-k)!) (2z)^{-k}
double half_integer_scaled(int n, double z) {
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k <= n; ++k) {
        term *= static_cast<double>((n + k) * (n - k + 1)) / (static_cast<double>(k) * 2.0 * z);
        sum += term;
    }
    return std::sqrt(kPi / (2.0 * z)) * sum;
}

// Returns e^z K_mu(z) and e^z K_{mu+1}(z) for |mu| <= 1/2 (Temme series for
// z < 2, Steed's continued fraction otherwise), then recurs upward in order.
double general_scaled(double nu, double z) {
    const int nl = static_cast<int>(nu + 0.5);
    const double mu = nu - nl;
    const double mu2 = mu * mu;
    const double xi = 1.0 / z;
    const double xi2 = 2.0 * xi;
    double kmu = 0.0;
    double k1 = 0.0;

    if (z < 2.0) {
        const double x2 = 0.5 * z;
        const double pimu = kPi * mu;
        const double fact = std::abs(pimu) < 1e-15 ? 1.0 : pimu / std::sin(pimu);
        double d = -std::log(x2);
        double e = mu * d;
        const double fact2 = std::abs(e) < 1e-15 ? 1.0 : std::sinh(e) / e;
        const TemmeGammas g = temme_gammas(mu);
        double ff = fact * (g.gam1 * std::cosh(e) + g.gam2 * fact2 * d);
        double sum = ff;
        e = std::exp(e);
        double p = 0.5 * e / g.gampl;
        double q = 0.5 / (e * g.gammi);
        double c = 1.0;
        d = x2 * x2;
        double sum1 = p;
        int i = 1;
        for (; i <= kMaxIter; ++i) {
            const double di = i;
            ff = (di * ff + p + q) / (di * di - mu2);
            c *= d / di;
            p /= di - mu;
            q /= di + mu;
            const double del = c * ff;
            sum += del;
            const double del1 = c * (p - di * ff);
            sum1 += del1;
            if (std::abs(del) < std::abs(sum) * kEps) {
                break;
            }
        }
        if (i > kMaxIter) {
            throw std::runtime_error("bessel_k: series failed to converge");
        }
        const double scale = std::exp(z);
        kmu = sum * scale;
        k1 = sum1 * xi2 * scale;
    } else {
        double b = 2.0 * (1.0 + z);
        double d = 1.0 / b;
        double h = d;
        double delh = d;
        double q1 = 0.0;
        double q2 = 1.0;
        const double a1 = 0.25 - mu2;
        double q = a1;
        double c = a1;
        double a = -a1;
        double s = 1.0 + q * delh;
        int i = 2;
        for (; i <= kMaxIter; ++i) {
            a -= 2.0 * (i - 1);
            c = -a * c / i;
            const double qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh = (b * d - 1.0) * delh;
            h += delh;
            const double dels = q * delh;
            s += dels;
            if (std::abs(dels / s) < kEps) {
                break;
            }
        }
        if (i > kMaxIter) {
            throw std::runtime_error("bessel_k: continued fraction failed to converge");
        }
        h = a1 * h;
        kmu = std::sqrt(kPi / (2.0 * z)) / s;
        k1 = kmu * (mu + z + 0.5 - h) * xi;
    }

    for (int i = 1; i <= nl; ++i) {
        const double next = (mu + i) * xi2 * k1 + kmu;
        kmu = k1;
        k1 = next;
    }
    return kmu;
}

void check_args(double nu, double z) {
    if (!std::isfinite(nu) || nu < 0.0) {
        throw std::domain_error("bessel_k: order must be finite and >= 0, got " + std::to_string(nu));
    }
    if (!(z > 0.0) || !std::isfinite(z)) {
        throw std::domain_error("bessel_k: argument must be finite and > 0, got " + std::to_string(z));
    }
}

}  // namespace

double bessel_k_scaled(double nu, double z) {
    check_args(nu, z);
    int n = 0;
    if (is_half_integer(nu, n)) {
        return half_integer_scaled(n, z);
    }
    return general_scaled(nu, z);
}

double log_bessel_k(double nu, double z) {
    return std::log(bessel_k_scaled(nu, z)) - z;
}

double bessel_k(double nu, double z) {
    check_args(nu, z);
    int n = 0;
    if (is_half_integer(nu, n)) {
        return half_integer_scaled(n, z) * std::exp(-z);
    }
    if (z < 2.0) {
        // The series path builds the unscaled value directly.
        return general_scaled(nu, z) * std::exp(-z);
    }
    return std::exp(log_bessel_k(nu, z));
}

double f_nu(double nu, double z) {
    check_args(nu, z);
    return std::exp(nu * std::log(z) + log_bessel_k(nu, z));
}

double f_nu_at_zero(double nu) {
    return std::exp((nu - 1.0) * std::numbers::ln2 + std::lgamma(nu));
}

}  // namespace efgp
