#include "fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cassert>
#include <complex>
#include <map>
#include <memory>
#include <mutex>

namespace ringswarm::detail {
namespace {

template <class T>
struct FftwDeleter {
    void operator()(T* p) const noexcept { fftw_free(p); }
};

template <class T>
using FftwBuffer = std::unique_ptr<T[], FftwDeleter<T>>;

template <class T>
FftwBuffer<T> fftw_buffer(std::size_t n)
{
    return FftwBuffer<T>(static_cast<T*>(fftw_malloc(sizeof(T) * n)));
}

struct PlanPair {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
};

// The FFTW planner is not reentrant; plan creation is serialised here and the
// plans are kept for the lifetime of the process. fftw_execute_dft_* on
// fftw_malloc'd buffers is safe to call concurrently.
class PlanCache {
public:
    PlanPair get(std::size_t m)
    {
        std::lock_guard lock(mutex_);
        auto it = plans_.find(m);
        if (it != plans_.end()) return it->second;

        auto real = fftw_buffer<double>(m);
        auto spec = fftw_buffer<fftw_complex>(m / 2 + 1);
        const int n = static_cast<int>(m);
        PlanPair p;
        p.forward = fftw_plan_dft_r2c_1d(n, real.get(), spec.get(), FFTW_ESTIMATE);
        p.backward = fftw_plan_dft_c2r_1d(n, spec.get(), real.get(), FFTW_ESTIMATE);
        plans_.emplace(m, p);
        return p;
    }

private:
    std::mutex mutex_;
    std::map<std::size_t, PlanPair> plans_;
};

PlanCache& plan_cache()
{
    static PlanCache cache;
    return cache;
}

}  // namespace

void cyclic_convolve(std::span<const double> a, std::span<const double> b, std::span<double> out)
{
    const std::size_t m = a.size();
    assert(b.size() == m && out.size() == m);
    const std::size_t bins = m / 2 + 1;
    const PlanPair plans = plan_cache().get(m);

    auto real = fftw_buffer<double>(m);
    auto spec_a = fftw_buffer<fftw_complex>(bins);
    auto spec_b = fftw_buffer<fftw_complex>(bins);

    std::copy(a.begin(), a.end(), real.get());
    fftw_execute_dft_r2c(plans.forward, real.get(), spec_a.get());
    std::copy(b.begin(), b.end(), real.get());
    fftw_execute_dft_r2c(plans.forward, real.get(), spec_b.get());

    for (std::size_t k = 0; k < bins; ++k) {
        const std::complex<double> x(spec_a[k][0], spec_a[k][1]);
        const std::complex<double> y(spec_b[k][0], spec_b[k][1]);
        const auto z = x * y;
        spec_a[k][0] = z.real();
        spec_a[k][1] = z.imag();
    }
    // c2r destroys its input; spec_a is scratch from here on.
    fftw_execute_dft_c2r(plans.backward, spec_a.get(), real.get());

    const double scale = 1.0 / static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i) out[i] = real[i] * scale;
}

}  // namespace ringswarm::detail
