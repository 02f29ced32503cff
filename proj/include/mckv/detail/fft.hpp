#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

namespace mckv::detail {

// Cached in-place complex-to-complex FFTW plans. Plans are created with
// FFTW_UNALIGNED so they can be re-executed on any buffer of the right size
// (fftw_execute_dft with an in-place plan). Plan creation is serialized; the
// executes themselves are thread-safe.
class FftPlanCache {
public:
    static FftPlanCache& instance() {
        static FftPlanCache cache;
        return cache;
    }

    void transform(std::vector<std::complex<double>>& data, int rank, int n0, int n1, int sign) {
        fftw_plan plan = nullptr;
        {
            std::lock_guard<std::mutex> lock(mutex_);
            const Key key{rank, n0, n1, sign};
            auto it = plans_.find(key);
            if (it == plans_.end()) {
                auto* buf = reinterpret_cast<fftw_complex*>(data.data());
                plan = rank == 1
                           ? fftw_plan_dft_1d(n0, buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED)
                           : fftw_plan_dft_2d(n0, n1, buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
                plans_.emplace(key, plan);
            } else {
                plan = it->second;
            }
        }
        auto* buf = reinterpret_cast<fftw_complex*>(data.data());
        fftw_execute_dft(plan, buf, buf);
    }

    FftPlanCache(const FftPlanCache&) = delete;
    FftPlanCache& operator=(const FftPlanCache&) = delete;

private:
    FftPlanCache() = default;
    ~FftPlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    using Key = std::tuple<int, int, int, int>;
    std::mutex mutex_;
    std::map<Key, fftw_plan> plans_;
};

/// Unnormalized forward DFT, in place. d==2 treats data as row-major n x n.
inline void dft_forward(std::vector<std::complex<double>>& data, int d, int n) {
    FftPlanCache::instance().transform(data, d, n, n, FFTW_FORWARD);
}

/// Unnormalized backward DFT, in place.
inline void dft_backward(std::vector<std::complex<double>>& data, int d, int n) {
    FftPlanCache::instance().transform(data, d, n, n, FFTW_BACKWARD);
}

}  // namespace mckv::detail
