#include "polyattr/spectral.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace polyattr::spectral {

SpectralSpace::SpectralSpace(double length, std::size_t n_modes)
    : length_(length), n_modes_(n_modes) {
  if (!(length > 0.0))
    throw std::domain_error("SpectralSpace: length must be positive");
  if (n_modes < 1)
    throw std::domain_error("SpectralSpace: need at least one mode");

  const double pi = std::numbers::pi;
  eigenvalues_.resize(n_modes);
  for (std::size_t j = 0; j < n_modes; ++j) {
    const double freq = static_cast<double>(j + 1) * pi / length;
    eigenvalues_[j] = freq * freq;
  }

  const std::size_t m_nodes = 2 * n_modes + 1;
  const double denom = static_cast<double>(m_nodes + 1);
  nodes_.resize(m_nodes);
  for (std::size_t m = 0; m < m_nodes; ++m)
    nodes_[m] = static_cast<double>(m + 1) * length / denom;

  sine_.resize(n_modes * m_nodes);
  sine_t_.resize(n_modes * m_nodes);
  for (std::size_t j = 0; j < n_modes; ++j)
    for (std::size_t m = 0; m < m_nodes; ++m) {
      const double v =
          std::sin(static_cast<double>(j + 1) * pi * static_cast<double>(m + 1) / denom);
      sine_[j * m_nodes + m] = v;
      sine_t_[m * n_modes + j] = v;
    }

  quad_weight_ = length / denom;
  basis_scale_ = std::sqrt(2.0 / length);
}

void SpectralSpace::to_physical(std::span<const double> modal,
                                std::vector<double>& values) const {
  if (modal.size() != n_modes_)
    throw std::invalid_argument("to_physical: modal size mismatch");
  const std::size_t m_nodes = nodes_.size();
  values.assign(m_nodes, 0.0);
  for (std::size_t j = 0; j < n_modes_; ++j) {
    const double coeff = modal[j] * basis_scale_;
    if (coeff == 0.0) continue;
    const double* row = &sine_[j * m_nodes];
    for (std::size_t m = 0; m < m_nodes; ++m) values[m] += coeff * row[m];
  }
}

void SpectralSpace::to_modal(std::span<const double> values,
                             std::vector<double>& modal) const {
  const std::size_t m_nodes = nodes_.size();
  if (values.size() != m_nodes)
    throw std::invalid_argument("to_modal: nodal size mismatch");
  modal.assign(n_modes_, 0.0);
  // Accumulate along the transposed table: the inner loop is a contiguous
  // axpy over the modal vector instead of a serial dot-product reduction.
  double* acc = modal.data();
  for (std::size_t m = 0; m < m_nodes; ++m) {
    const double v = values[m];
    const double* col = &sine_t_[m * n_modes_];
    for (std::size_t j = 0; j < n_modes_; ++j) acc[j] += v * col[j];
  }
  const double scale = quad_weight_ * basis_scale_;
  for (std::size_t j = 0; j < n_modes_; ++j) modal[j] *= scale;
}

double SpectralSpace::integrate(std::span<const double> values) const {
  if (values.size() != nodes_.size())
    throw std::invalid_argument("integrate: nodal size mismatch");
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc * quad_weight_;
}

State zero_state(const SpectralSpace& space) {
  State s;
  s.a.assign(space.n_modes(), 0.0);
  s.b.assign(space.n_modes(), 0.0);
  return s;
}

double norm_u(const State& s) {
  double acc = 0.0;
  for (double v : s.a) acc += v * v;
  return std::sqrt(acc);
}

double norm_ut(const State& s) {
  double acc = 0.0;
  for (double v : s.b) acc += v * v;
  return std::sqrt(acc);
}

double norm_grad_u(const State& s, const SpectralSpace& space) {
  const auto& lam = space.eigenvalues();
  double acc = 0.0;
  for (std::size_t j = 0; j < s.a.size(); ++j) acc += lam[j] * s.a[j] * s.a[j];
  return std::sqrt(acc);
}

double energy_norm(const State& s, const SpectralSpace& space) {
  const auto& lam = space.eigenvalues();
  double acc = 0.0;
  for (std::size_t j = 0; j < s.a.size(); ++j) {
    acc += lam[j] * s.a[j] * s.a[j];
    acc += s.b[j] * s.b[j];
  }
  return std::sqrt(acc);
}

double energy_norm_distance(const State& x, const State& y,
                            const SpectralSpace& space) {
  const auto& lam = space.eigenvalues();
  if (x.a.size() != y.a.size())
    throw std::invalid_argument("energy_norm_distance: size mismatch");
  double acc = 0.0;
  for (std::size_t j = 0; j < x.a.size(); ++j) {
    const double da = x.a[j] - y.a[j];
    const double db = x.b[j] - y.b[j];
    acc += lam[j] * da * da + db * db;
  }
  return std::sqrt(acc);
}

bool all_finite(const State& s) {
  for (double v : s.a)
    if (!std::isfinite(v)) return false;
  for (double v : s.b)
    if (!std::isfinite(v)) return false;
  return std::isfinite(s.time);
}

}  // namespace polyattr::spectral
