#include <cmath>
#include <complex>
#include <mutex>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

#include "efgp/transforms.hpp"

namespace efgp {

namespace {

using cplx = std::complex<double>;

// FFTW planning is not thread-safe; execution with the new-array interface is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

int fast_fft_length(int n) {
    if (n < 1) {
        return 1;
    }
    for (int c = n;; ++c) {
        int r = c;
        for (int p : {2, 3, 5}) {
            while (r % p == 0) {
                r /= p;
            }
        }
        if (r == 1) {
            return c;
        }
    }
}

struct ToeplitzOperator::Plans {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;

    Plans(int d, int length) {
        std::vector<int> dims(d, length);
        std::size_t total = 1;
        for (int i = 0; i < d; ++i) {
            total *= static_cast<std::size_t>(length);
        }
        std::vector<cplx> a(total);
        std::vector<cplx> b(total);
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        const std::lock_guard<std::mutex> lock(planner_mutex());
        forward = fftw_plan_dft(d, dims.data(), as_fftw(a.data()), as_fftw(b.data()), FFTW_FORWARD,
                                flags);
        backward = fftw_plan_dft(d, dims.data(), as_fftw(a.data()), as_fftw(b.data()),
                                 FFTW_BACKWARD, flags);
        if (forward == nullptr || backward == nullptr) {
            throw std::runtime_error("FFTW planning failed");
        }
    }
    ~Plans() {
        const std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(forward);
        fftw_destroy_plan(backward);
    }
    Plans(const Plans&) = delete;
    Plans& operator=(const Plans&) = delete;
};

ToeplitzOperator::ToeplitzOperator(const ToeplitzSymbol& symbol)
    : m_(symbol.m), d_(symbol.d) {
    if (d_ < 1 || d_ > 3 || m_ < 0) {
        throw std::invalid_argument("ToeplitzOperator: invalid symbol metadata");
    }
    const int ts = symbol.side();
    std::size_t sym_total = 1;
    size_ = 1;
    for (int i = 0; i < d_; ++i) {
        sym_total *= static_cast<std::size_t>(ts);
        size_ *= static_cast<std::size_t>(2 * m_ + 1);
    }
    if (static_cast<std::size_t>(symbol.values.size()) != sym_total) {
        throw std::invalid_argument("ToeplitzOperator: symbol array size does not match metadata");
    }
    length_ = fast_fft_length(ts);
    plans_ = std::make_unique<Plans>(d_, length_);
    std::size_t total = 1;
    for (int i = 0; i < d_; ++i) {
        total *= static_cast<std::size_t>(length_);
    }
    // Circulant embedding: c[k mod L] = t_k for k in {-2m..2m}^d.
    std::vector<cplx> c(total, cplx{});
    const int two_m = 2 * m_;
    const auto wrap = [&](int k) { return static_cast<std::size_t>(k < 0 ? k + length_ : k); };
    for (std::size_t l = 0; l < sym_total; ++l) {
        std::size_t rest = l;
        int k[3] = {0, 0, 0};
        for (int i = d_ - 1; i >= 0; --i) {
            k[i] = static_cast<int>(rest % static_cast<std::size_t>(ts)) - two_m;
            rest /= static_cast<std::size_t>(ts);
        }
        std::size_t pos = 0;
        for (int i = 0; i < d_; ++i) {
            pos = pos * static_cast<std::size_t>(length_) + wrap(k[i]);
        }
        c[pos] = symbol.values(static_cast<Eigen::Index>(l));
    }
    spectrum_.resize(static_cast<Eigen::Index>(total));
    fftw_execute_dft(plans_->forward, as_fftw(c.data()), as_fftw(spectrum_.data()));
    spectrum_ /= static_cast<double>(total);
}

ToeplitzOperator::~ToeplitzOperator() = default;
ToeplitzOperator::ToeplitzOperator(ToeplitzOperator&&) noexcept = default;
ToeplitzOperator& ToeplitzOperator::operator=(ToeplitzOperator&&) noexcept = default;

Eigen::VectorXcd ToeplitzOperator::apply(const Eigen::VectorXcd& v) const {
    if (static_cast<std::size_t>(v.size()) != size_) {
        throw std::invalid_argument("ToeplitzOperator::apply: vector length does not match J_m");
    }
    const int s = 2 * m_ + 1;
    const auto L = static_cast<std::size_t>(length_);
    const std::size_t total = static_cast<std::size_t>(spectrum_.size());
    std::vector<cplx> u(total, cplx{});
    std::vector<cplx> f(total);
    // Place v_{j'} at position j' + m in each axis.
    for (std::size_t l = 0; l < size_; ++l) {
        std::size_t rest = l;
        std::size_t pos = 0;
        std::size_t mul = 1;
        for (int i = d_ - 1; i >= 0; --i) {
            pos += (rest % static_cast<std::size_t>(s)) * mul;
            rest /= static_cast<std::size_t>(s);
            mul *= L;
        }
        u[pos] = v(static_cast<Eigen::Index>(l));
    }
    fftw_execute_dft(plans_->forward, as_fftw(u.data()), as_fftw(f.data()));
    for (std::size_t i = 0; i < total; ++i) {
        f[i] *= spectrum_(static_cast<Eigen::Index>(i));
    }
    fftw_execute_dft(plans_->backward, as_fftw(f.data()), as_fftw(u.data()));
    Eigen::VectorXcd out(static_cast<Eigen::Index>(size_));
    for (std::size_t l = 0; l < size_; ++l) {
        std::size_t rest = l;
        std::size_t pos = 0;
        std::size_t mul = 1;
        for (int i = d_ - 1; i >= 0; --i) {
            pos += (rest % static_cast<std::size_t>(s)) * mul;
            rest /= static_cast<std::size_t>(s);
            mul *= L;
        }
        out(static_cast<Eigen::Index>(l)) = u[pos];
    }
    return out;
}

Eigen::VectorXcd toeplitz_apply(const ToeplitzSymbol& symbol, const Eigen::VectorXcd& v) {
    return ToeplitzOperator(symbol).apply(v);
}

Eigen::MatrixXcd toeplitz_dense(const ToeplitzSymbol& symbol) {
    const int m = symbol.m;
    const int d = symbol.d;
    const int s = 2 * m + 1;
    const int ts = symbol.side();
    std::size_t size = 1;
    for (int i = 0; i < d; ++i) {
        size *= static_cast<std::size_t>(s);
    }
    const auto n = static_cast<Eigen::Index>(size);
    Eigen::MatrixXcd t(n, n);
    const auto split = [&](std::size_t l, int* j) {
        for (int i = d - 1; i >= 0; --i) {
            j[i] = static_cast<int>(l % static_cast<std::size_t>(s)) - m;
            l /= static_cast<std::size_t>(s);
        }
    };
    int a[3];
    int b[3];
    for (Eigen::Index r = 0; r < n; ++r) {
        split(static_cast<std::size_t>(r), a);
        for (Eigen::Index c = 0; c < n; ++c) {
            split(static_cast<std::size_t>(c), b);
            std::size_t pos = 0;
            for (int i = 0; i < d; ++i) {
                pos = pos * static_cast<std::size_t>(ts) + static_cast<std::size_t>(a[i] - b[i] + 2 * m);
            }
            t(r, c) = symbol.values(static_cast<Eigen::Index>(pos));
        }
    }
    return t;
}

}  // namespace efgp
