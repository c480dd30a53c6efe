// Sine spectral basis on (0, L) with Dirichlet conditions: eigenvalues of
// -d2/dx2, modal<->physical transforms on a de-aliased collocation grid, and
// the quadrature rule used for pointwise nonlinearities.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace polyattr::spectral {

/// Discretization of (0, L) into the first n_modes eigenfunctions
/// e_j(x) = sqrt(2/L) sin(j pi x / L).  The collocation grid carries
/// 2 J + 1 interior nodes, enough to project a cubic of a band-limited
/// function onto the resolved modes without aliasing (3/2-style padding)
/// and to integrate its quartic primitive exactly by the trapezoid rule.
class SpectralSpace {
 public:
  SpectralSpace(double length, std::size_t n_modes);

  double length() const { return length_; }
  std::size_t n_modes() const { return n_modes_; }
  std::size_t n_nodes() const { return nodes_.size(); }
  double quad_weight() const { return quad_weight_; }

  const std::vector<double>& eigenvalues() const { return eigenvalues_; }
  const std::vector<double>& nodes() const { return nodes_; }

  /// u(x_m) for all collocation nodes from modal coefficients.
  void to_physical(std::span<const double> modal, std::vector<double>& values) const;

  /// L2 projection of nodal values onto the resolved modes; exact for
  /// band-limited data up to the grid's alias-free range.
  void to_modal(std::span<const double> values, std::vector<double>& modal) const;

  /// Trapezoid integral of nodal values; endpoint contributions vanish for
  /// integrands built from functions that are zero on the boundary.
  double integrate(std::span<const double> values) const;

 private:
  double length_;
  std::size_t n_modes_;
  std::vector<double> eigenvalues_;
  std::vector<double> nodes_;
  std::vector<double> sine_;    // sine_[j * n_nodes + m] = sin((j+1) pi (m+1) / (M+1))
  std::vector<double> sine_t_;  // transposed copy for the modal accumulation
  double quad_weight_;
  double basis_scale_;  // sqrt(2 / L)
};

/// One phase point (u, u_t) in modal coordinates.
struct State {
  std::vector<double> a;  // modal coefficients of u
  std::vector<double> b;  // modal coefficients of u_t
  double time = 0.0;
};

State zero_state(const SpectralSpace& space);

double norm_u(const State& s);
double norm_ut(const State& s);
double norm_grad_u(const State& s, const SpectralSpace& space);

/// sqrt(|grad u|^2 + |u_t|^2): the phase-space norm used for balls,
/// distances and entering times.
double energy_norm(const State& s, const SpectralSpace& space);

/// Same weighted norm applied to the difference of two states.
double energy_norm_distance(const State& x, const State& y,
                            const SpectralSpace& space);

bool all_finite(const State& s);

}  // namespace polyattr::spectral
