#pragma once

#include <vector>

#include "stochak/economy.hpp"
#include "stochak/fields.hpp"
#include "stochak/spectral.hpp"

namespace stochak {

// Fully assembled model: fields, eigensystem, policy constants, and the
// initial mode coefficients. Immutable after construction; shared freely.
struct Model {
  GridPtr grid;
  ModelFields fields;
  ModelParams params;
  EigenSystem es;
  PolicyConstants pc;
  std::vector<double> k0;  // project(K0)

  double x0_init() const { return k0[0]; }
};

// Builds the eigensystem and policy; throws AssumptionError when the
// standing assumptions fail on this configuration.
Model make_model(ModelFields fields, ModelParams params, int n_modes);

}  // namespace stochak
