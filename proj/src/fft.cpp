// SPDX-License-Identifier: Apache-2.0

#include "sptw/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace sptw::fft {

namespace {

// FFTW planning is not thread-safe; execution with the new-array API is.
class PlanCache {
public:
    fftw_plan get(std::size_t n, int sign)
    {
        std::lock_guard lock(mutex_);
        auto key = std::make_pair(n, sign);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        auto* tmp = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
        fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), tmp, tmp, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(tmp);
        plans_.emplace(key, p);
        return p;
    }

    ~PlanCache()
    {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

private:
    std::mutex mutex_;
    std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

PlanCache& cache()
{
    static PlanCache c;
    return c;
}

std::vector<cd> run(std::span<const cd> x, int sign)
{
    std::vector<cd> out(x.begin(), x.end());
    if (out.empty()) return out;
    fftw_plan p = cache().get(out.size(), sign);
    auto* data = reinterpret_cast<fftw_complex*>(out.data());
    fftw_execute_dft(p, data, data);
    return out;
}

} // namespace

std::vector<cd> forward(std::span<const cd> x) { return run(x, FFTW_FORWARD); }

std::vector<cd> inverse(std::span<const cd> x) { return run(x, FFTW_BACKWARD); }

std::size_t next_pow2(std::size_t n) noexcept
{
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

} // namespace sptw::fft
