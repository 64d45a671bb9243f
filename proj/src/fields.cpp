#include "stochak/fields.hpp"

#include <algorithm>
#include <charconv>
#include <numbers>
#include <sstream>

namespace stochak {

namespace {

bool is_integer(double x) { return std::floor(x) == x; }

std::vector<double> split_doubles(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    size_t pos = 0;
    double v = std::stod(tok, &pos);
    out.push_back(v);
  }
  return out;
}

}  // namespace

SpatialGrid::SpatialGrid(int n_points) : n_(n_points) {
  if (n_points < 8 || n_points % 2 != 0)
    throw std::invalid_argument("SpatialGrid: n_points must be even and >= 8");
  spacing_ = 2.0 * std::numbers::pi / n_points;
  x_.resize(static_cast<size_t>(n_points));
  for (int i = 0; i < n_points; ++i) x_[static_cast<size_t>(i)] = i * spacing_;
}

GridPtr make_grid(int n_points) { return std::make_shared<SpatialGrid>(n_points); }

SpatialField::SpatialField(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), v_(std::move(values)) {
  if (!grid_) throw std::invalid_argument("SpatialField: null grid");
  if (static_cast<int>(v_.size()) != grid_->n())
    throw std::invalid_argument("SpatialField: values length != n_points");
  for (double x : v_)
    if (!std::isfinite(x)) throw std::domain_error("SpatialField: non-finite value");
}

SpatialField SpatialField::constant(GridPtr grid, double value) {
  std::vector<double> v(static_cast<size_t>(grid->n()), value);
  return SpatialField(std::move(grid), std::move(v));
}

double SpatialField::min_value() const { return *std::min_element(v_.begin(), v_.end()); }
double SpatialField::max_value() const { return *std::max_element(v_.begin(), v_.end()); }

void require_same_grid(const SpatialField& a, const SpatialField& b) {
  if (a.grid() == b.grid()) return;
  if (a.grid()->n() != b.grid()->n())
    throw std::invalid_argument("fields live on different grids");
}

double quadrature(const SpatialField& f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  return f.grid()->spacing() * s;
}

double inner_product(const SpatialField& f, const SpatialField& g) {
  require_same_grid(f, g);
  double s = 0.0;
  for (int i = 0; i < f.size(); ++i) s += f[i] * g[i];
  return f.grid()->spacing() * s;
}

double norm_l2(const SpatialField& f) { return std::sqrt(inner_product(f, f)); }

SpatialField field_pow(const SpatialField& f, double exponent) {
  std::vector<double> out(static_cast<size_t>(f.size()));
  for (int i = 0; i < f.size(); ++i) {
    double base = f[i];
    if (base < 0.0 && !is_integer(exponent))
      throw std::domain_error("field_pow: negative base with fractional exponent");
    if (base == 0.0 && exponent < 0.0)
      throw std::domain_error("field_pow: zero base with negative exponent");
    double r = std::pow(base, exponent);
    if (!std::isfinite(r)) throw std::domain_error("field_pow: non-finite result");
    out[static_cast<size_t>(i)] = r;
  }
  return SpatialField(f.grid(), std::move(out));
}

SpatialField operator*(const SpatialField& a, const SpatialField& b) {
  require_same_grid(a, b);
  std::vector<double> out(static_cast<size_t>(a.size()));
  for (int i = 0; i < a.size(); ++i) out[static_cast<size_t>(i)] = a[i] * b[i];
  return SpatialField(a.grid(), std::move(out));
}

SpatialField operator*(double a, const SpatialField& b) {
  std::vector<double> out(static_cast<size_t>(b.size()));
  for (int i = 0; i < b.size(); ++i) out[static_cast<size_t>(i)] = a * b[i];
  return SpatialField(b.grid(), std::move(out));
}

SpatialField operator+(const SpatialField& a, const SpatialField& b) {
  require_same_grid(a, b);
  std::vector<double> out(static_cast<size_t>(a.size()));
  for (int i = 0; i < a.size(); ++i) out[static_cast<size_t>(i)] = a[i] + b[i];
  return SpatialField(a.grid(), std::move(out));
}

SpatialField operator-(const SpatialField& a, const SpatialField& b) {
  require_same_grid(a, b);
  std::vector<double> out(static_cast<size_t>(a.size()));
  for (int i = 0; i < a.size(); ++i) out[static_cast<size_t>(i)] = a[i] - b[i];
  return SpatialField(a.grid(), std::move(out));
}

SpatialField operator/(const SpatialField& a, const SpatialField& b) {
  require_same_grid(a, b);
  std::vector<double> out(static_cast<size_t>(a.size()));
  for (int i = 0; i < a.size(); ++i) {
    if (b[i] == 0.0) throw std::domain_error("field division by zero");
    out[static_cast<size_t>(i)] = a[i] / b[i];
  }
  return SpatialField(a.grid(), std::move(out));
}

SpatialField affine(const SpatialField& f, double scale, double offset) {
  std::vector<double> out(static_cast<size_t>(f.size()));
  for (int i = 0; i < f.size(); ++i) out[static_cast<size_t>(i)] = scale * f[i] + offset;
  return SpatialField(f.grid(), std::move(out));
}

SpatialField parse_field_recipe(GridPtr grid, const std::string& recipe) {
  auto colon = recipe.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("field recipe missing ':' -- " + recipe);
  std::string kind = recipe.substr(0, colon);
  std::string args = recipe.substr(colon + 1);
  try {
    if (kind == "const") {
      return SpatialField::constant(std::move(grid), std::stod(args));
    }
    if (kind == "cos" || kind == "sin") {
      auto p = split_doubles(args);
      if (p.size() != 3)
        throw std::invalid_argument("expected a,b,m");
      double a = p[0], b = p[1], m = p[2];
      if (kind == "cos")
        return SpatialField::from_function(std::move(grid),
                                           [=](double x) { return a + b * std::cos(m * x); });
      return SpatialField::from_function(std::move(grid),
                                         [=](double x) { return a + b * std::sin(m * x); });
    }
    if (kind == "samples") {
      auto v = split_doubles(args);
      return SpatialField(std::move(grid), std::move(v));
    }
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument("bad field recipe '" + recipe + "': " + e.what());
  }
  throw std::invalid_argument("unknown field recipe kind '" + kind + "'");
}

}  // namespace stochak
