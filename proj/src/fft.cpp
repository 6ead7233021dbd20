#include "fft.hpp"

#include <mutex>
#include <new>

namespace spoofbench::detail {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

RealFft2d::RealFft2d(int rows, int cols) : rows_(rows), cols_(cols) {
  const auto n_real = static_cast<std::size_t>(rows) * cols;
  const auto n_complex = static_cast<std::size_t>(rows) * (cols / 2 + 1);
  std::lock_guard lock(planner_mutex());
  real_ = fftw_alloc_real(n_real);
  spectrum_ = fftw_alloc_complex(n_complex);
  if (!real_ || !spectrum_) {
    fftw_free(real_);
    fftw_free(spectrum_);
    throw std::bad_alloc();
  }
  forward_ = fftw_plan_dft_r2c_2d(rows, cols, real_, spectrum_, FFTW_ESTIMATE);
  inverse_ = fftw_plan_dft_c2r_2d(rows, cols, spectrum_, real_, FFTW_ESTIMATE);
}

RealFft2d::~RealFft2d() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(forward_);
  fftw_destroy_plan(inverse_);
  fftw_free(real_);
  fftw_free(spectrum_);
}

void RealFft2d::forward() { fftw_execute(forward_); }

// c2r destroys its input; callers refill the spectrum before each inverse.
void RealFft2d::inverse() { fftw_execute(inverse_); }

}  // namespace spoofbench::detail
