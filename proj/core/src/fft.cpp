#include "capmeas/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace capmeas::fft {
namespace {

enum class Kind { R2C, C2R, C2CForward, C2CBackward };

class PlanCache {
public:
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan get(Kind kind, std::size_t n) {
        std::lock_guard lock(mutex_);
        auto key = std::make_pair(kind, n);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;

        const int len = static_cast<int>(n);
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        auto* cbuf = fftw_alloc_complex(n);
        auto* cbuf2 = fftw_alloc_complex(n);
        auto* rbuf = fftw_alloc_real(n);
        fftw_plan plan = nullptr;
        switch (kind) {
            case Kind::R2C: plan = fftw_plan_dft_r2c_1d(len, rbuf, cbuf, flags); break;
            case Kind::C2R: plan = fftw_plan_dft_c2r_1d(len, cbuf, rbuf, flags); break;
            case Kind::C2CForward:
                plan = fftw_plan_dft_1d(len, cbuf, cbuf2, FFTW_FORWARD, flags);
                break;
            case Kind::C2CBackward:
                plan = fftw_plan_dft_1d(len, cbuf, cbuf2, FFTW_BACKWARD, flags);
                break;
        }
        fftw_free(cbuf);
        fftw_free(cbuf2);
        fftw_free(rbuf);
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::pair<Kind, std::size_t>, fftw_plan> plans_;
};

PlanCache& cache() {
    static PlanCache instance;
    return instance;
}

fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

std::vector<std::complex<double>> forward_real(std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<double> in(x.begin(), x.end());
    std::vector<std::complex<double>> out(n / 2 + 1);
    if (n == 0) return out;
    fftw_execute_dft_r2c(cache().get(Kind::R2C, n), in.data(), as_fftw(out.data()));
    return out;
}

std::vector<double> inverse_real(std::span<const std::complex<double>> half, std::size_t n) {
    std::vector<std::complex<double>> in(half.begin(), half.end());
    in.resize(n / 2 + 1);
    std::vector<double> out(n);
    if (n == 0) return out;
    fftw_execute_dft_c2r(cache().get(Kind::C2R, n), as_fftw(in.data()), out.data());
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& v : out) v *= scale;
    return out;
}

std::vector<std::complex<double>> forward(std::span<const std::complex<double>> x) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> in(x.begin(), x.end());
    std::vector<std::complex<double>> out(n);
    if (n == 0) return out;
    fftw_execute_dft(cache().get(Kind::C2CForward, n), as_fftw(in.data()), as_fftw(out.data()));
    return out;
}

std::vector<std::complex<double>> inverse(std::span<const std::complex<double>> x) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> in(x.begin(), x.end());
    std::vector<std::complex<double>> out(n);
    if (n == 0) return out;
    fftw_execute_dft(cache().get(Kind::C2CBackward, n), as_fftw(in.data()), as_fftw(out.data()));
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& v : out) v *= scale;
    return out;
}

}  // namespace capmeas::fft
