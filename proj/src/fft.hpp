#pragma once

#include <fftw3.h>

namespace spoofbench::detail {

/// Owning wrapper around a pair of FFTW real<->complex 2-D plans with their
/// own buffers. Plan creation is serialised; execution is thread-safe as
/// long as each thread uses its own instance.
class RealFft2d {
 public:
  RealFft2d(int rows, int cols);
  ~RealFft2d();
  RealFft2d(const RealFft2d&) = delete;
  RealFft2d& operator=(const RealFft2d&) = delete;

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int half_cols() const { return cols_ / 2 + 1; }

  double* real() { return real_; }
  fftw_complex* spectrum() { return spectrum_; }

  void forward();  // real -> spectrum
  void inverse();  // spectrum -> real, unnormalised (scaled by rows*cols)

 private:
  int rows_;
  int cols_;
  double* real_ = nullptr;
  fftw_complex* spectrum_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

}  // namespace spoofbench::detail
