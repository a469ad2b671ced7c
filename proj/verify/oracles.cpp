#include "verify/oracles.hpp"

#include <cmath>
#include <numbers>

#include "sobotrace/quadrature.hpp"

namespace sobotrace::verify {

SampledField random_trig_field(const Grid& g, Rng& rng, int max_mode) {
  const int d = g.dim();
  struct Mode {
    std::vector<int> k;
    double amp, phase;
  };
  std::vector<Mode> modes;
  std::vector<int> k(d, -max_mode);
  while (true) {
    int norm2 = 0;
    for (int v : k) norm2 += v * v;
    if (norm2 > 0) modes.push_back({k, rng.normal() / (1.0 + norm2), rng.uniform(0, 2 * std::numbers::pi)});
    int a = d - 1;
    while (a >= 0 && k[a] == max_mode) k[a--] = -max_mode;
    if (a < 0) break;
    ++k[a];
  }
  const double offset = rng.normal();
  return sample(
      [&](std::span<const double> x) {
        double v = offset;
        for (const auto& m : modes) {
          double arg = m.phase;
          for (int a = 0; a < d; ++a) arg += 2 * std::numbers::pi * m.k[a] * (x[a] - g.box().lo[a]) / g.box().extent(a);
          v += m.amp * std::cos(arg);
        }
        return v;
      },
      g);
}

SampledField random_strip_field(const Grid& g, Rng& rng, int max_mode) {
  const int d = g.dim() - 1;
  struct Mode {
    std::vector<int> k;
    int j;
    double amp, phase, vphase;
  };
  std::vector<Mode> modes;
  std::vector<int> k(d, -max_mode);
  while (true) {
    int norm2 = 0;
    for (int v : k) norm2 += v * v;
    for (int j = 0; j <= 3; ++j)
      modes.push_back({k, j, rng.normal() / (1.0 + norm2 + j * j), rng.uniform(0, 2 * std::numbers::pi),
                       rng.uniform(0, 2 * std::numbers::pi)});
    int a = d - 1;
    while (a >= 0 && k[a] == max_mode) k[a--] = -max_mode;
    if (a < 0) break;
    ++k[a];
  }
  return sample(
      [&](std::span<const double> x) {
        const double t = (x[d] - g.box().lo[d]) / g.box().extent(d);
        double v = 0.0;
        for (const auto& m : modes) {
          double arg = m.phase;
          for (int a = 0; a < d; ++a) arg += 2 * std::numbers::pi * m.k[a] * (x[a] - g.box().lo[a]) / g.box().extent(a);
          v += m.amp * std::cos(arg) * std::cos(std::numbers::pi * m.j * t + m.vphase);
        }
        return v;
      },
      g);
}

SampledField random_bump_field(const Grid& g, Rng& rng, int bumps, double radius) {
  const int d = g.dim();
  std::vector<std::vector<double>> centers;
  std::vector<double> amps;
  for (int b = 0; b < bumps; ++b) {
    std::vector<double> c(d);
    for (int a = 0; a < d; ++a) {
      const double lo = g.box().lo[a] + (g.periodic(a) ? 0.0 : radius);
      const double hi = g.box().hi[a] - (g.periodic(a) ? 0.0 : radius);
      c[a] = lo < hi ? rng.uniform(lo, hi) : 0.5 * (g.box().lo[a] + g.box().hi[a]);
    }
    centers.push_back(c);
    amps.push_back(rng.uniform(0.5, 1.5) * (rng.uniform() < 0.5 ? -1.0 : 1.0));
  }
  return sample(
      [&](std::span<const double> x) {
        double v = 0.0;
        for (std::size_t b = 0; b < centers.size(); ++b) {
          double r2 = 0.0;
          for (int a = 0; a < d; ++a) {
            double dx = x[a] - centers[b][a];
            if (g.periodic(a)) {
              const double L = g.box().extent(a);
              dx -= L * std::round(dx / L);
            }
            r2 += dx * dx;
          }
          const double t = r2 / (radius * radius);
          if (t < 1.0) v += amps[b] * std::pow(1.0 - t, 3);
        }
        return v;
      },
      g);
}

double brute_force_seminorm_pow(const SampledField& f, const ScreeningFunction& sigma, double s, double p) {
  const Grid& g = f.grid();
  const int N = g.dim();
  const double sp = s * p;
  return parallel_sum(g.node_count(), [&](std::size_t i) {
    std::vector<double> x = g.point(i), y(N);
    const double sig = sigma(x);
    // Image ranges on periodic axes.
    std::vector<int> kmax(N, 0);
    for (int a = 0; a < N; ++a)
      if (g.periodic(a)) kmax[a] = static_cast<int>(std::ceil(sig / g.box().extent(a))) + 1;
    double acc = 0.0;
    std::vector<int> img(N);
    for (std::size_t j = 0; j < g.node_count(); ++j) {
      g.point(j, y);
      for (int a = 0; a < N; ++a) img[a] = -kmax[a];
      while (true) {
        double d2 = 0.0;
        for (int a = 0; a < N; ++a) {
          const double dy = y[a] + img[a] * g.box().extent(a) - x[a];
          d2 += dy * dy;
        }
        const double dist = std::sqrt(d2);
        if (dist > 0.0 && dist < sig)
          acc += g.weight(j) * std::pow(std::abs(f[j] - f[i]), p) / std::pow(dist, sp + N);
        int a = N - 1;
        for (; a >= 0; --a) {
          if (img[a] < kmax[a]) {
            ++img[a];
            break;
          }
          img[a] = -kmax[a];
        }
        if (a < 0) break;
      }
    }
    return g.weight(i) * acc;
  });
}

namespace {

/// 1 + sum of a few cosine modes over the box, the amplitudes summing to `spread`.
PointFunction random_cosine_sum(const Grid& g, Rng& rng, double offset, double spread) {
  const int d = g.dim();
  struct Mode {
    std::vector<int> k;
    double amp, phase;
  };
  std::vector<Mode> modes(3);
  double total = 0.0;
  for (auto& m : modes) {
    m.k.resize(d);
    for (int a = 0; a < d; ++a) m.k[a] = rng.integer(0, 2);
    m.amp = rng.uniform(0.2, 1.0);
    m.phase = rng.uniform(0, 2 * std::numbers::pi);
    total += m.amp;
  }
  for (auto& m : modes) m.amp *= spread / total;
  const Box box = g.box();
  return [modes, box, offset, d](std::span<const double> x) {
    double v = offset;
    for (const auto& m : modes) {
      double arg = m.phase;
      for (int a = 0; a < d; ++a) arg += 2 * std::numbers::pi * m.k[a] * (x[a] - box.lo[a]) / box.extent(a);
      v += m.amp * std::cos(arg);
    }
    return v;
  };
}

}  // namespace

AdmissibleLagrangian random_model_lagrangian(const Grid& g, double p, Rng& rng, bool with_drift) {
  const double spread = rng.uniform(0.1, 0.5);
  ModelCoefficients c;
  c.weight = random_cosine_sum(g, rng, 1.0, spread);
  c.weight_min = 1.0 - spread;
  c.weight_max = 1.0 + spread;
  if (with_drift) {
    std::vector<PointFunction> comps;
    for (int a = 0; a < g.dim(); ++a) comps.push_back(random_cosine_sum(g, rng, rng.uniform(-0.2, 0.2), 0.3));
    c.drift = [comps](std::span<const double> x, std::span<double> out) {
      for (std::size_t a = 0; a < comps.size(); ++a) out[a] = comps[a](x);
    };
  }
  return model_lagrangian(p, c);
}

TracePair random_dirichlet_data(const Grid& g, Rng& rng) {
  const Grid hg = horizontal_grid(g);
  return {random_trig_field(hg, rng, 2), random_trig_field(hg, rng, 2)};
}

NeumannData random_neumann_data(const Grid& g, Rng& rng) {
  const Grid hg = horizontal_grid(g);
  NeumannData data{random_strip_field(g, rng, 2), random_trig_field(hg, rng, 2), random_trig_field(hg, rng, 2)};
  const double volume = integral(SampledField::constant(g, 1.0));
  data.psi = data.psi - SampledField::constant(g, data.compatibility() / volume);
  return data;
}

double ball_integral_oracle(int d, const std::function<double(std::span<const double>)>& integrand) {
  require(d == 1 || d == 2, "ball_integral_oracle: d must be 1 or 2");
  auto eval = [&](int panels) {
    if (d == 1) {
      return integrate_composite([&](double x) { double p[1] = {x}; return integrand(p); }, -1.0, 1.0, panels, 16);
    }
    const int angles = 64;
    double total = 0.0;
    for (int j = 0; j < angles; ++j) {
      const double t = 2 * std::numbers::pi * j / angles;
      total += integrate_composite(
          [&](double r) {
            double p[2] = {r * std::cos(t), r * std::sin(t)};
            return integrand(p) * r;
          },
          0.0, 1.0, panels, 16);
    }
    return total * 2 * std::numbers::pi / angles;
  };
  double prev = eval(1);
  for (int panels = 2; panels <= 64; panels *= 2) {
    const double cur = eval(panels);
    if (std::abs(cur - prev) <= 1e-11) return cur;
    prev = cur;
  }
  return prev;
}

double monomial(const MultiIndex& alpha, std::span<const double> x) {
  double v = 1.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) v *= std::pow(x[i], alpha[i]);
  return v;
}

double kernel_scaling_error(const Mollifier& phi, const MultiIndex& alpha, Rng& rng, int trials) {
  const int d = phi.dim;
  require(d <= 2 && static_cast<int>(alpha.size()) == d + 1, "kernel_scaling_error: d <= 2 and |alpha| entries = d + 1");
  const DerivativeKernel kern = derivative_kernel(phi, alpha);
  int order = 0;
  for (int a : alpha) order += a;
  std::vector<int> axes;
  for (int a = 0; a <= d; ++a)
    for (int c = 0; c < alpha[a]; ++c) axes.push_back(a);
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    const double xn = rng.uniform(0.5, 1.5);
    double y[2], z[2], xp[2];
    double zr = 2.0;
    while (zr > 0.8) {
      zr = 0.0;
      for (int a = 0; a < d; ++a) {
        z[a] = rng.uniform(-0.8, 0.8);
        zr += z[a] * z[a];
      }
      zr = std::sqrt(zr);
    }
    for (int a = 0; a < d; ++a) {
      y[a] = rng.uniform(-1, 1);
      xp[a] = y[a] + xn * z[a];
    }
    auto F = [&](const double* pt) {
      double w[2];
      for (int a = 0; a < d; ++a) w[a] = (pt[a] - y[a]) / pt[d];
      return std::pow(pt[d], -d) * phi(std::span<const double>(w, d));
    };
    const double h = 1e-4;
    double fd = 0.0;
    const int combos = 1 << axes.size();
    for (int mask = 0; mask < combos; ++mask) {
      double pt[3];
      for (int a = 0; a < d; ++a) pt[a] = xp[a];
      pt[d] = xn;
      int sign = 1;
      for (std::size_t q = 0; q < axes.size(); ++q) {
        const bool plus = (mask >> q) & 1;
        pt[axes[q]] += plus ? h : -h;
        if (!plus) sign = -sign;
      }
      fd += sign * F(pt);
    }
    fd /= std::pow(2 * h, static_cast<double>(axes.size()));
    const double exact = std::pow(xn, -(order + d)) * kern(std::span<const double>(z, d));
    const double scale = std::max(std::abs(exact), 1e-2 * std::pow(xn, -(order + d)));
    worst = std::max(worst, std::abs(fd - exact) / scale);
  }
  return worst;
}

double refinement_order(const std::vector<int>& shapes, const std::vector<double>& errors) {
  std::vector<double> lh, le;
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    lh.push_back(std::log(1.0 / shapes[i]));
    le.push_back(std::log(errors[i]));
  }
  return fit_slope(lh, le);
}

}  // namespace sobotrace::verify
