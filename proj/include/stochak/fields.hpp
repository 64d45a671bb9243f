#pragma once

#include <cmath>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace stochak {

// Uniform periodic grid on [0, 2*pi): x_i = i * spacing, spacing = 2*pi/n.
class SpatialGrid {
 public:
  explicit SpatialGrid(int n_points);

  int n() const { return n_; }
  double spacing() const { return spacing_; }
  const std::vector<double>& x() const { return x_; }

 private:
  int n_;
  double spacing_;
  std::vector<double> x_;
};

using GridPtr = std::shared_ptr<const SpatialGrid>;

GridPtr make_grid(int n_points);

// Real-valued function sampled on a SpatialGrid. Immutable in spirit:
// operations return new fields, never mutate in place.
class SpatialField {
 public:
  SpatialField(GridPtr grid, std::vector<double> values);

  static SpatialField constant(GridPtr grid, double value);
  template <typename Fn>
  static SpatialField from_function(GridPtr grid, Fn&& fn) {
    std::vector<double> v(grid->n());
    for (int i = 0; i < grid->n(); ++i) v[static_cast<size_t>(i)] = fn(grid->x()[static_cast<size_t>(i)]);
    return SpatialField(std::move(grid), std::move(v));
  }

  const GridPtr& grid() const { return grid_; }
  int size() const { return static_cast<int>(v_.size()); }
  double operator[](int i) const { return v_[static_cast<size_t>(i)]; }
  const std::vector<double>& values() const { return v_; }

  double min_value() const;
  double max_value() const;
  // min value strictly above tolerance; used for fields that must be > 0
  bool strictly_positive(double tol = 1e-12) const { return min_value() > tol; }
  bool nonnegative() const { return min_value() >= 0.0; }

 private:
  GridPtr grid_;
  std::vector<double> v_;
};

// Periodic trapezoid rule: spacing * sum(values). Exact (to roundoff) for
// trigonometric polynomials of degree < n/2.
double quadrature(const SpatialField& f);

// L2(S^1) inner product via quadrature of the pointwise product.
double inner_product(const SpatialField& f, const SpatialField& g);

double norm_l2(const SpatialField& f);

// Pointwise power with domain checks: negative base with non-integer
// exponent and 0 with negative exponent are rejected.
SpatialField field_pow(const SpatialField& f, double exponent);

SpatialField operator*(const SpatialField& a, const SpatialField& b);
SpatialField operator*(double a, const SpatialField& b);
SpatialField operator+(const SpatialField& a, const SpatialField& b);
SpatialField operator-(const SpatialField& a, const SpatialField& b);
SpatialField operator/(const SpatialField& a, const SpatialField& b);

// scale * f + offset
SpatialField affine(const SpatialField& f, double scale, double offset);

// Field recipes for configs:
//   const:v            constant v
//   cos:a,b,m          a + b*cos(m*x)
//   sin:a,b,m          a + b*sin(m*x)
//   samples:v0,v1,...  one value per grid point
SpatialField parse_field_recipe(GridPtr grid, const std::string& recipe);

void require_same_grid(const SpatialField& a, const SpatialField& b);

}  // namespace stochak
