#include "stochak/model.hpp"

#include <stdexcept>

namespace stochak {

Model make_model(ModelFields fields, ModelParams params, int n_modes) {
  params.validate();
  if (!fields.N.strictly_positive())
    throw std::invalid_argument("model: N must be bounded away from zero");
  if (!fields.A.nonnegative() || !fields.f.nonnegative())
    throw std::invalid_argument("model: A and f must be nonnegative");

  GridPtr grid = fields.A.grid();
  EigenSystem es = build_eigensystem(fields.A, n_modes);
  require_assumptions(params, fields, es);
  PolicyConstants pc = make_policy(params, fields, es);
  std::vector<double> k0 = project(fields.K0, es);
  if (k0[0] < 0.0)
    throw std::invalid_argument("model: initial capital has <K0,e0> < 0");
  return Model{std::move(grid), std::move(fields), params,
               std::move(es),   std::move(pc),     std::move(k0)};
}

}  // namespace stochak
