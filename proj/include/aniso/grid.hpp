#pragma once

// Rectangular Dirichlet grids on boxes [0, L_1] x ... x [0, L_n], nodal fields
// vanishing on the boundary, staggered forward-difference gradients, cell
// quadrature and discrete Orlicz norms.

#include <filesystem>
#include <functional>
#include <utility>
#include <vector>

#include "aniso/numeric.hpp"
#include "aniso/young1d.hpp"
#include "aniso/youngnd.hpp"

namespace aniso {

class GridDomain {
 public:
  GridDomain() = default;
  /// nodes[i] counts boundary nodes too (>= 3); h_i = L_i / (nodes_i - 1).
  GridDomain(std::vector<double> extents, std::vector<int> nodes);
  /// Unit-length axes with the same node count.
  static GridDomain unit(int dim, int nodes);

  int dim() const noexcept { return static_cast<int>(extents_.size()); }
  const std::vector<double>& extents() const noexcept { return extents_; }
  const std::vector<int>& nodes() const noexcept { return nodes_; }
  double spacing(int axis) const { return h_[static_cast<std::size_t>(axis)]; }
  const std::vector<double>& spacings() const noexcept { return h_; }
  double measure() const;
  double cell_volume() const noexcept { return cell_volume_; }

  /// Interior nodes (nodes - 2 per axis) and cells (nodes - 1 per axis), row-major, last axis fastest.
  std::size_t interior_count() const noexcept { return interior_count_; }
  std::size_t cell_count() const noexcept { return cell_count_; }
  std::vector<int> interior_shape() const;
  std::vector<int> cell_shape() const;
  /// Coordinates of interior node j.
  std::vector<double> node_position(std::size_t j) const;
  /// Coordinates of the midpoint of cell c.
  std::vector<double> cell_center(std::size_t c) const;

  bool operator==(const GridDomain& o) const { return extents_ == o.extents_ && nodes_ == o.nodes_; }

 private:
  std::vector<double> extents_, h_;
  std::vector<int> nodes_;
  double cell_volume_ = 0.0;
  std::size_t interior_count_ = 0, cell_count_ = 0;
};

/// Values at interior nodes; the boundary is implicitly zero.
struct Field {
  GridDomain domain;
  std::vector<double> values;

  static Field zeros(const GridDomain& d) { return {d, std::vector<double>(d.interior_count(), 0.0)}; }
  static Field from_function(const GridDomain& d, const std::function<double(std::span<const double>)>& f);
};

/// Per-cell gradient vectors, cell-major with dim() components per cell.
struct GradField {
  GridDomain domain;
  std::vector<double> values;

  std::span<const double> cell(std::size_t c) const {
    const auto n = static_cast<std::size_t>(domain.dim());
    return {values.data() + c * n, n};
  }
  std::span<double> cell(std::size_t c) {
    const auto n = static_cast<std::size_t>(domain.dim());
    return {values.data() + c * n, n};
  }
  static GradField zeros(const GridDomain& d) {
    return {d, std::vector<double>(d.cell_count() * static_cast<std::size_t>(d.dim()), 0.0)};
  }
};

/// Forward differences from each cell's lower corner node against the zero extension.
GradField gradient(const Field& u);
/// The negative adjoint of gradient: sum_c W_c . (grad u)_c = - sum_j u_j (div W)_j.
Field divergence(const GradField& w);

/// sum_c values_c * cell volume.
double integrate(const GridDomain& d, std::span<const double> cell_values);
/// sum_j values_j * cell volume over interior nodes (lumped mass).
double integrate_nodes(const GridDomain& d, std::span<const double> node_values);
/// Cell volume weighted inner products.
double inner(const Field& a, const Field& b);
double inner(const GradField& a, const GradField& b);

/// Modulars: int Phi(U) over cells, int B(U) over cells (scalar cell data) or nodes.
double modular(const GradField& u, const NFunction& phi);
double modular(const GridDomain& d, std::span<const double> cell_values, const YoungFunction1D& b);
double modular(const Field& u, const YoungFunction1D& b);

/// inf{k > 0 : modular(k) <= 1} for a nonincreasing modular, by bracketing
/// from k = 1 with factor 4 then bisection to relative width tol.
double luxemburg_from_modular(const std::function<double(double)>& modular_at, double tol = 1e-12);

double luxemburg_norm(const GradField& u, const NFunction& phi, double tol = 1e-12);
double luxemburg_norm(const GridDomain& d, std::span<const double> cell_values, const YoungFunction1D& b,
                      double tol = 1e-12);
double luxemburg_norm(const Field& u, const YoungFunction1D& b, double tol = 1e-12);
/// Luxemburg norm with respect to the conjugate Phi_bullet (numerical conjugates cached per call).
double conjugate_luxemburg_norm(const GradField& v, const NFunction& phi, double tol = 1e-10);

/// Orlicz norm inf_{k>0} (1 + int Phi(k U)) / k.
double orlicz_norm(const GradField& u, const NFunction& phi);

/// int U . V <= 2 ||U||_Phi ||V||_{Phi_bullet} with 1e-9 relative slack.
struct HolderResult {
  bool holds = false;
  double lhs = 0.0;
  double rhs = 0.0;
};
HolderResult holder_check(const GradField& u, const GradField& v, const NFunction& phi);

/// sup_U (int U . V - int Phi_bullet(U)) against int Phi(V), over candidates
/// U = Phi_xi(V_h) for truncations V_h and random perturbations of them.
struct SupRepresentation {
  double lhs_best = 0.0;
  double rhs = 0.0;
  std::size_t candidates = 0;
};
SupRepresentation sup_representation_check(const GradField& v, const NFunction& phi, int trials, Rng& rng);

/// CSV with node coordinates and value; one row per interior node.
void write_csv(const Field& u, const std::filesystem::path& path);
/// Little-endian binary: u32 dim, f64 extents[dim], u32 nodes[dim], f64 values (row-major interior).
void write_binary(const Field& u, const std::filesystem::path& path);
Field read_binary(const std::filesystem::path& path);

}  // namespace aniso
