#include "nsv/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace nsv::detail {

namespace {

struct Plans {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

std::mutex cache_mutex;
std::map<int, Plans>& plan_cache() {
    static std::map<int, Plans> cache;
    return cache;
}

// FFTW_UNALIGNED lets the cached plan run on any caller buffer.
Plans& plans_for(int n) {
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto& cache = plan_cache();
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    fftw_complex* buf = fftw_alloc_complex(std::size_t(n) * n * n);
    Plans p;
    unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    p.fwd = fftw_plan_dft_3d(n, n, n, buf, buf, FFTW_FORWARD, flags);
    p.bwd = fftw_plan_dft_3d(n, n, n, buf, buf, FFTW_BACKWARD, flags);
    fftw_free(buf);
    return cache.emplace(n, p).first->second;
}

}  // namespace

void dft_forward(int n, std::complex<double>* data) {
    auto* d = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(plans_for(n).fwd, d, d);
}

void dft_backward(int n, std::complex<double>* data) {
    auto* d = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(plans_for(n).bwd, d, d);
}

}  // namespace nsv::detail
