#pragma once
// Horizontal-torus convolution with radial kernels, evaluated in Fourier space.

#include <complex>
#include <vector>

#include "sobotrace/fields.hpp"
#include "sobotrace/mollifiers.hpp"

namespace sobotrace::detail {

class HorizontalSpectrum {
 public:
  /// g must be all-periodic.
  explicit HorizontalSpectrum(const Grid& g);
  ~HorizontalSpectrum();
  HorizontalSpectrum(const HorizontalSpectrum&) = delete;
  HorizontalSpectrum& operator=(const HorizontalSpectrum&) = delete;

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return n_; }
  /// Distinct |xi_k| and, per coefficient, its index into that list.
  const std::vector<double>& distinct_norms() const { return norms_; }
  const std::vector<std::size_t>& norm_index() const { return norm_index_; }

  /// Fourier coefficients c_k = (1/n) Σ_x f(x) e^{-2πi k·x/L}.
  std::vector<std::complex<double>> forward(const SampledField& f) const;
  /// Real part of Σ_k coeffs[k] e^{2πi k·x/L} at the grid nodes.
  void inverse(const std::vector<std::complex<double>>& coeffs, double* out) const;

  /// table[l][j] = kernel(scales[l] * distinct_norms[j]), filled in parallel.
  std::vector<std::vector<double>> multiplier_table(const RadialFourier& kernel, const std::vector<double>& scales) const;

 private:
  Grid grid_;
  std::size_t n_ = 0;
  std::vector<double> norms_;
  std::vector<std::size_t> norm_index_;
  void* forward_plan_ = nullptr;
  void* inverse_plan_ = nullptr;
  std::complex<double>* buffer_ = nullptr;
};

/// Fields (phi_{scale} * f) for each scale, as rows of node values.
std::vector<std::vector<double>> convolve_levels(const HorizontalSpectrum& spec, const SampledField& f,
                                                 const RadialFourier& kernel, const std::vector<double>& scales);

}  // namespace sobotrace::detail
