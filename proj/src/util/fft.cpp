// SPDX-License-Identifier: Apache-2.0

#include "dmc/util/fft.hpp"

#include "dmc/errors.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace dmc::util {

namespace {

// (n, howmany, stride, dist, sign)
using Key = std::tuple<int, int, int, int, int>;

struct PlanCache {
    std::mutex mu;
    std::map<Key, fftw_plan> plans;
    ~PlanCache() {
        for (auto& [k, p] : plans) fftw_destroy_plan(p);
    }
};

PlanCache& cache() {
    static PlanCache c;
    return c;
}

fftw_plan get_plan(int n, int howmany, int stride, int dist, FftSign sign) {
    auto& c = cache();
    const Key key{n, howmany, stride, dist, sign == FftSign::Forward ? 0 : 1};
    std::lock_guard<std::mutex> lock(c.mu);
    if (auto it = c.plans.find(key); it != c.plans.end()) return it->second;
    // The planner overwrites its arrays, so plan on scratch memory.
    const std::size_t span = static_cast<std::size_t>(howmany - 1) * dist + static_cast<std::size_t>(n - 1) * stride + 1;
    auto* scratch = fftw_alloc_complex(span);
    int dims[1] = {n};
    fftw_plan p = fftw_plan_many_dft(1, dims, howmany, scratch, nullptr, stride, dist, scratch, nullptr, stride, dist,
                                     sign == FftSign::Forward ? FFTW_FORWARD : FFTW_BACKWARD,
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(scratch);
    if (p == nullptr) throw NumericalError("FFT planning failed");
    c.plans.emplace(key, p);
    return p;
}

}  // namespace

void fft_many(std::complex<double>* data, int n, int howmany, int stride, int dist, FftSign sign) {
    if (n < 1 || howmany < 1 || stride < 1 || dist < 0) throw InvalidDim("bad FFT layout");
    auto* ptr = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(get_plan(n, howmany, stride, dist, sign), ptr, ptr);
}

}  // namespace dmc::util
