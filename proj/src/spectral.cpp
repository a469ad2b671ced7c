#include "spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>

#include "sobotrace/common.hpp"

namespace sobotrace::detail {

HorizontalSpectrum::HorizontalSpectrum(const Grid& g) : grid_(g), n_(g.node_count()) {
  const int d = g.dim();
  for (int a = 0; a < d; ++a) require(g.periodic(a), "horizontal spectrum: every axis must be periodic");
  std::vector<int> dims(d);
  for (int a = 0; a < d; ++a) dims[a] = g.nodes(a);

  std::map<double, std::size_t> seen;
  norm_index_.resize(n_);
  std::vector<int> mi(d);
  for (std::size_t i = 0; i < n_; ++i) {
    g.multi_index(i, mi);
    double n2 = 0.0;
    for (int a = 0; a < d; ++a) {
      int k = mi[a];
      if (2 * k > dims[a]) k -= dims[a];
      // The Nyquist mode is folded to |k| so that real data stays real.
      const double xi = std::abs(k) / g.box().extent(a);
      n2 += xi * xi;
    }
    auto [it, fresh] = seen.emplace(n2, norms_.size());
    if (fresh) norms_.push_back(std::sqrt(n2));
    norm_index_[i] = it->second;
  }

  buffer_ = reinterpret_cast<std::complex<double>*>(fftw_malloc(sizeof(fftw_complex) * n_));
  auto* data = reinterpret_cast<fftw_complex*>(buffer_);
  forward_plan_ = fftw_plan_dft(d, dims.data(), data, data, FFTW_FORWARD, FFTW_ESTIMATE);
  inverse_plan_ = fftw_plan_dft(d, dims.data(), data, data, FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!forward_plan_ || !inverse_plan_) throw NumericalError("horizontal spectrum: FFT planning failed");
}

HorizontalSpectrum::~HorizontalSpectrum() {
  if (forward_plan_) fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  if (inverse_plan_) fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
  if (buffer_) fftw_free(buffer_);
}

std::vector<std::complex<double>> HorizontalSpectrum::forward(const SampledField& f) const {
  require(f.grid() == grid_, "horizontal spectrum: field grid mismatch");
  for (std::size_t i = 0; i < n_; ++i) buffer_[i] = f[i];
  fftw_execute(static_cast<fftw_plan>(forward_plan_));
  std::vector<std::complex<double>> c(buffer_, buffer_ + n_);
  const double scale = 1.0 / static_cast<double>(n_);
  for (auto& v : c) v *= scale;
  return c;
}

void HorizontalSpectrum::inverse(const std::vector<std::complex<double>>& coeffs, double* out) const {
  for (std::size_t i = 0; i < n_; ++i) buffer_[i] = coeffs[i];
  fftw_execute(static_cast<fftw_plan>(inverse_plan_));
  for (std::size_t i = 0; i < n_; ++i) out[i] = buffer_[i].real();
}

std::vector<std::vector<double>> HorizontalSpectrum::multiplier_table(const RadialFourier& kernel,
                                                                      const std::vector<double>& scales) const {
  std::vector<std::vector<double>> table(scales.size(), std::vector<double>(norms_.size()));
  parallel_chunks(scales.size(), [&](int, std::size_t b, std::size_t e) {
    for (std::size_t l = b; l < e; ++l)
      for (std::size_t j = 0; j < norms_.size(); ++j) table[l][j] = kernel(scales[l] * norms_[j]);
  });
  return table;
}

std::vector<std::vector<double>> convolve_levels(const HorizontalSpectrum& spec, const SampledField& f,
                                                 const RadialFourier& kernel, const std::vector<double>& scales) {
  const auto coeffs = spec.forward(f);
  const auto table = spec.multiplier_table(kernel, scales);
  const auto& idx = spec.norm_index();
  std::vector<std::vector<double>> out(scales.size(), std::vector<double>(spec.size()));
  std::vector<std::complex<double>> work(spec.size());
  for (std::size_t l = 0; l < scales.size(); ++l) {
    for (std::size_t k = 0; k < spec.size(); ++k) work[k] = coeffs[k] * table[l][idx[k]];
    spec.inverse(work, out[l].data());
  }
  return out;
}

}  // namespace sobotrace::detail
