#include "aerotrack/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace aerotrack {
namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(int rows, int cols, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_tuple(rows, cols, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    const std::size_t n = static_cast<std::size_t>(rows) * cols;
    auto* in = fftw_alloc_complex(n);
    auto* out = fftw_alloc_complex(n);
    fftw_plan plan =
        fftw_plan_dft_2d(rows, cols, in, out, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    if (plan == nullptr) throw Error("FFTW planning failed");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& plans() {
  static PlanCache cache;
  return cache;
}

ComplexImage transform(const ComplexImage& input, int sign) {
  const int rows = static_cast<int>(input.rows());
  const int cols = static_cast<int>(input.cols());
  ComplexImage in = input;  // FFTW may not read from const memory
  ComplexImage out(rows, cols);
  fftw_plan plan = plans().get(rows, cols, sign);
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

}  // namespace

ComplexImage fft2(const Image& input) { return transform(input.cast<std::complex<double>>(), FFTW_FORWARD); }

ComplexImage fft2(const ComplexImage& input) { return transform(input, FFTW_FORWARD); }

ComplexImage ifft2(const ComplexImage& input) {
  ComplexImage out = transform(input, FFTW_BACKWARD);
  out /= static_cast<double>(input.size());
  return out;
}

Image ifft2_real(const ComplexImage& input) { return ifft2(input).real(); }

}  // namespace aerotrack
