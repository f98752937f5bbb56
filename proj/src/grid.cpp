#include "aniso/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "aniso/error.hpp"

namespace aniso {

GridDomain::GridDomain(std::vector<double> extents, std::vector<int> nodes)
    : extents_(std::move(extents)), nodes_(std::move(nodes)) {
  if (extents_.empty() || extents_.size() > 3) throw DomainError("GridDomain: dimension must be 1, 2 or 3");
  if (extents_.size() != nodes_.size()) throw DomainError("GridDomain: extents and nodes differ in length");
  cell_volume_ = 1.0;
  interior_count_ = 1;
  cell_count_ = 1;
  for (std::size_t i = 0; i < extents_.size(); ++i) {
    if (!(extents_[i] > 0.0) || !std::isfinite(extents_[i])) throw DomainError("GridDomain: extents must be positive");
    if (nodes_[i] < 3) throw DomainError("GridDomain: need at least 3 nodes per axis");
    h_.push_back(extents_[i] / (nodes_[i] - 1));
    cell_volume_ *= h_.back();
    interior_count_ *= static_cast<std::size_t>(nodes_[i] - 2);
    cell_count_ *= static_cast<std::size_t>(nodes_[i] - 1);
  }
}

GridDomain GridDomain::unit(int dim, int nodes) {
  return GridDomain(std::vector<double>(static_cast<std::size_t>(dim), 1.0),
                    std::vector<int>(static_cast<std::size_t>(dim), nodes));
}

double GridDomain::measure() const {
  return std::accumulate(extents_.begin(), extents_.end(), 1.0, std::multiplies<>());
}

std::vector<int> GridDomain::interior_shape() const {
  std::vector<int> s;
  for (int n : nodes_) s.push_back(n - 2);
  return s;
}

std::vector<int> GridDomain::cell_shape() const {
  std::vector<int> s;
  for (int n : nodes_) s.push_back(n - 1);
  return s;
}

namespace {

/// Multi-index of flat row-major index j in `shape` (last axis fastest).
void unravel(std::size_t j, const std::vector<int>& shape, std::vector<int>& out) {
  out.resize(shape.size());
  for (std::size_t i = shape.size(); i-- > 0;) {
    const auto s = static_cast<std::size_t>(shape[i]);
    out[i] = static_cast<int>(j % s);
    j /= s;
  }
}

/// Flat interior index of full-grid node m, or -1 on the boundary.
std::ptrdiff_t interior_index(const std::vector<int>& m, const std::vector<int>& nodes) {
  std::ptrdiff_t idx = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i] <= 0 || m[i] >= nodes[i] - 1) return -1;
    idx = idx * (nodes[i] - 2) + (m[i] - 1);
  }
  return idx;
}

void require_same(const GridDomain& a, const GridDomain& b) {
  if (!(a == b)) throw DomainError("grid: fields live on different domains");
}

}  // namespace

std::vector<double> GridDomain::node_position(std::size_t j) const {
  std::vector<int> m;
  unravel(j, interior_shape(), m);
  std::vector<double> x(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) x[i] = (m[i] + 1) * h_[i];
  return x;
}

std::vector<double> GridDomain::cell_center(std::size_t c) const {
  std::vector<int> m;
  unravel(c, cell_shape(), m);
  std::vector<double> x(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) x[i] = (m[i] + 0.5) * h_[i];
  return x;
}

Field Field::from_function(const GridDomain& d, const std::function<double(std::span<const double>)>& f) {
  Field u = zeros(d);
  for (std::size_t j = 0; j < d.interior_count(); ++j) u.values[j] = f(d.node_position(j));
  return u;
}

GradField gradient(const Field& u) {
  const GridDomain& d = u.domain;
  if (u.values.size() != d.interior_count()) throw DomainError("gradient: field size mismatch");
  const auto n = static_cast<std::size_t>(d.dim());
  GradField g = GradField::zeros(d);
  const auto shape = d.cell_shape();
  std::vector<int> m, e;
  for (std::size_t c = 0; c < d.cell_count(); ++c) {
    unravel(c, shape, m);
    const auto base_idx = interior_index(m, d.nodes());
    const double base = base_idx >= 0 ? u.values[static_cast<std::size_t>(base_idx)] : 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      e = m;
      ++e[a];
      const auto up_idx = interior_index(e, d.nodes());
      const double up = up_idx >= 0 ? u.values[static_cast<std::size_t>(up_idx)] : 0.0;
      g.values[c * n + a] = (up - base) / d.spacing(static_cast<int>(a));
    }
  }
  return g;
}

Field divergence(const GradField& w) {
  const GridDomain& d = w.domain;
  const auto n = static_cast<std::size_t>(d.dim());
  if (w.values.size() != d.cell_count() * n) throw DomainError("divergence: field size mismatch");
  Field out = Field::zeros(d);
  const auto shape = d.interior_shape();
  const auto cshape = d.cell_shape();
  std::vector<int> m;
  for (std::size_t j = 0; j < d.interior_count(); ++j) {
    unravel(j, shape, m);
    for (int& v : m) ++v;  // full-grid node = cell with this lower corner
    std::size_t c = 0;
    for (std::size_t i = 0; i < n; ++i) c = c * static_cast<std::size_t>(cshape[i]) + static_cast<std::size_t>(m[i]);
    double s = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      // Cell j - e_a shares the edge (j - e_a, j); its flat index drops by the axis stride.
      std::size_t stride = 1;
      for (std::size_t i = a + 1; i < n; ++i) stride *= static_cast<std::size_t>(cshape[i]);
      s += (w.values[c * n + a] - w.values[(c - stride) * n + a]) / d.spacing(static_cast<int>(a));
    }
    out.values[j] = s;
  }
  return out;
}

double integrate(const GridDomain& d, std::span<const double> cell_values) {
  if (cell_values.size() != d.cell_count()) throw DomainError("integrate: expected one value per cell");
  double s = 0.0;
  for (double v : cell_values) s += v;
  return s * d.cell_volume();
}

double integrate_nodes(const GridDomain& d, std::span<const double> node_values) {
  if (node_values.size() != d.interior_count()) throw DomainError("integrate_nodes: expected one value per node");
  double s = 0.0;
  for (double v : node_values) s += v;
  return s * d.cell_volume();
}

double inner(const Field& a, const Field& b) {
  require_same(a.domain, b.domain);
  double s = 0.0;
  for (std::size_t j = 0; j < a.values.size(); ++j) s += a.values[j] * b.values[j];
  return s * a.domain.cell_volume();
}

double inner(const GradField& a, const GradField& b) {
  require_same(a.domain, b.domain);
  double s = 0.0;
  for (std::size_t j = 0; j < a.values.size(); ++j) s += a.values[j] * b.values[j];
  return s * a.domain.cell_volume();
}

double modular(const GradField& u, const NFunction& phi) {
  if (phi.dim() != u.domain.dim()) throw DomainError("modular: dimension mismatch");
  double s = 0.0;
  for (std::size_t c = 0; c < u.domain.cell_count(); ++c) s += phi(u.cell(c));
  return s * u.domain.cell_volume();
}

double modular(const GridDomain& d, std::span<const double> cell_values, const YoungFunction1D& b) {
  if (cell_values.size() != d.cell_count()) throw DomainError("modular: expected one value per cell");
  double s = 0.0;
  for (double v : cell_values) s += b(v);
  return s * d.cell_volume();
}

double modular(const Field& u, const YoungFunction1D& b) {
  double s = 0.0;
  for (double v : u.values) s += b(v);
  return s * u.domain.cell_volume();
}

double luxemburg_from_modular(const std::function<double(double)>& modular_at, double tol) {
  double lo = 1.0, hi = 1.0;
  if (modular_at(1.0) <= 1.0) {
    lo = 0.25;
    while (modular_at(lo) <= 1.0) {
      hi = lo;
      lo *= 0.25;
      if (lo < 1e-300) return 0.0;
    }
  } else {
    hi = 4.0;
    while (modular_at(hi) > 1.0) {
      lo = hi;
      hi *= 4.0;
      if (hi > 1e300) throw InvariantError("luxemburg_norm: modular exceeds 1 for every k");
    }
  }
  while (hi - lo > tol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    (modular_at(mid) <= 1.0 ? hi : lo) = mid;
  }
  return hi;
}

double luxemburg_norm(const GradField& u, const NFunction& phi, double tol) {
  if (std::all_of(u.values.begin(), u.values.end(), [](double v) { return v == 0.0; })) return 0.0;
  GradField scaled = u;
  return luxemburg_from_modular(
      [&](double k) {
        for (std::size_t i = 0; i < u.values.size(); ++i) scaled.values[i] = u.values[i] / k;
        return modular(scaled, phi);
      },
      tol);
}

double luxemburg_norm(const GridDomain& d, std::span<const double> cell_values, const YoungFunction1D& b, double tol) {
  if (std::all_of(cell_values.begin(), cell_values.end(), [](double v) { return v == 0.0; })) return 0.0;
  std::vector<double> scaled(cell_values.size());
  return luxemburg_from_modular(
      [&](double k) {
        for (std::size_t i = 0; i < scaled.size(); ++i) scaled[i] = cell_values[i] / k;
        return modular(d, scaled, b);
      },
      tol);
}

double luxemburg_norm(const Field& u, const YoungFunction1D& b, double tol) {
  if (std::all_of(u.values.begin(), u.values.end(), [](double v) { return v == 0.0; })) return 0.0;
  Field scaled = u;
  return luxemburg_from_modular(
      [&](double k) {
        for (std::size_t i = 0; i < u.values.size(); ++i) scaled.values[i] = u.values[i] / k;
        return modular(scaled, b);
      },
      tol);
}

double conjugate_luxemburg_norm(const GradField& v, const NFunction& phi, double tol) {
  if (std::all_of(v.values.begin(), v.values.end(), [](double x) { return x == 0.0; })) return 0.0;
  const auto n = static_cast<std::size_t>(phi.dim());
  std::vector<double> x(n);
  return luxemburg_from_modular(
      [&](double k) {
        double s = 0.0;
        for (std::size_t c = 0; c < v.domain.cell_count(); ++c) {
          const auto cell = v.cell(c);
          for (std::size_t i = 0; i < n; ++i) x[i] = cell[i] / k;
          s += conjugate_nd(phi, x);
        }
        return s * v.domain.cell_volume();
      },
      tol);
}

double orlicz_norm(const GradField& u, const NFunction& phi) {
  if (std::all_of(u.values.begin(), u.values.end(), [](double v) { return v == 0.0; })) return 0.0;
  GradField scaled = u;
  auto amemiya = [&](double lk) {
    const double k = std::exp(lk);
    for (std::size_t i = 0; i < u.values.size(); ++i) scaled.values[i] = u.values[i] * k;
    const double m = modular(scaled, phi);
    return std::isfinite(m) ? (1.0 + m) / k : kInf;
  };
  // Coarse scan in log k, then golden-section refinement around the best point.
  const int count = 241;
  const double a = std::log(1e-12), b = std::log(1e12);
  double best = kInf;
  int best_i = 0;
  for (int i = 0; i < count; ++i) {
    const double v = amemiya(a + (b - a) * i / (count - 1));
    if (v < best) {
      best = v;
      best_i = i;
    }
  }
  const double step = (b - a) / (count - 1);
  double lo = a + step * (best_i - 1), hi = a + step * (best_i + 1);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = amemiya(x1), f2 = amemiya(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = amemiya(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = amemiya(x2);
    }
  }
  return std::min({best, f1, f2});
}

HolderResult holder_check(const GradField& u, const GradField& v, const NFunction& phi) {
  require_same(u.domain, v.domain);
  HolderResult r;
  r.lhs = inner(u, v);
  r.rhs = 2.0 * luxemburg_norm(u, phi) * conjugate_luxemburg_norm(v, phi);
  r.holds = r.lhs <= r.rhs * (1.0 + 1e-9) + 1e-300;
  return r;
}

SupRepresentation sup_representation_check(const GradField& v, const NFunction& phi, int trials, Rng& rng) {
  if (trials < 1) throw DomainError("sup_representation_check: trials must be >= 1");
  const GridDomain& d = v.domain;
  const auto n = static_cast<std::size_t>(phi.dim());
  SupRepresentation out;
  out.rhs = modular(v, phi);

  ConjugateHandle conj(phi);
  auto value_of = [&](const GradField& u) {
    double s = 0.0;
    for (std::size_t c = 0; c < d.cell_count(); ++c) {
      const auto uc = u.cell(c), vc = v.cell(c);
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += uc[i] * vc[i];
      s += dot - conj(uc);
    }
    ++out.candidates;
    return s * d.cell_volume();
  };

  // Truncation levels: quantiles of |V| per cell, plus no truncation.
  std::vector<double> mags(d.cell_count());
  for (std::size_t c = 0; c < d.cell_count(); ++c) {
    const auto vc = v.cell(c);
    double s = 0.0;
    for (double x : vc) s += x * x;
    mags[c] = std::sqrt(s);
  }
  std::vector<double> sorted = mags;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> levels{kInf};
  for (double q : {0.25, 0.5, 0.75, 0.9})
    levels.push_back(sorted[static_cast<std::size_t>(q * static_cast<double>(sorted.size() - 1))]);

  out.lhs_best = -kInf;
  GradField full = GradField::zeros(d);
  for (double h : levels) {
    GradField u = GradField::zeros(d);
    for (std::size_t c = 0; c < d.cell_count(); ++c)
      if (mags[c] <= h) phi.gradient(v.cell(c), u.cell(c));
    if (std::isinf(h)) full = u;
    out.lhs_best = std::max(out.lhs_best, value_of(u));
  }
  for (int t = 0; t < trials; ++t) {
    GradField u = full;
    const double amp = 0.1 * rng.uniform();
    for (double& x : u.values) x *= 1.0 + amp * rng.normal();
    out.lhs_best = std::max(out.lhs_best, value_of(u));
  }
  return out;
}

void write_csv(const Field& u, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw DomainError("write_csv: cannot open " + path.string());
  const int n = u.domain.dim();
  for (int i = 0; i < n; ++i) os << "x" << i << ",";
  os << "value\n";
  os << std::setprecision(17);
  for (std::size_t j = 0; j < u.values.size(); ++j) {
    for (double x : u.domain.node_position(j)) os << x << ",";
    os << u.values[j] << "\n";
  }
}

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::ostream& os, double x) {
  const auto v = std::bit_cast<std::uint64_t>(x);
  for (int i = 0; i < 8; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_bytes(std::istream& is, int count) {
  std::uint64_t v = 0;
  for (int i = 0; i < count; ++i) {
    const int c = is.get();
    if (c == std::char_traits<char>::eof()) throw DomainError("read_binary: truncated file");
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return v;
}

}  // namespace

void write_binary(const Field& u, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DomainError("write_binary: cannot open " + path.string());
  const auto& d = u.domain;
  put_u32(os, static_cast<std::uint32_t>(d.dim()));
  for (double e : d.extents()) put_f64(os, e);
  for (int n : d.nodes()) put_u32(os, static_cast<std::uint32_t>(n));
  for (double v : u.values) put_f64(os, v);
}

Field read_binary(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DomainError("read_binary: cannot open " + path.string());
  const auto dim = static_cast<std::size_t>(get_bytes(is, 4));
  if (dim < 1 || dim > 3) throw DomainError("read_binary: bad dimension");
  std::vector<double> extents(dim);
  std::vector<int> nodes(dim);
  for (double& e : extents) e = std::bit_cast<double>(get_bytes(is, 8));
  for (int& n : nodes) n = static_cast<int>(get_bytes(is, 4));
  GridDomain d(extents, nodes);
  Field u = Field::zeros(d);
  for (double& v : u.values) v = std::bit_cast<double>(get_bytes(is, 8));
  return u;
}

}  // namespace aniso
