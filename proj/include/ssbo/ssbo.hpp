#ifndef SSBO_SSBO_HPP
#define SSBO_SSBO_HPP

#include "ssbo/bench.hpp"
#include "ssbo/design_space.hpp"
#include "ssbo/driver.hpp"
#include "ssbo/infill.hpp"
#include "ssbo/inner_solvers.hpp"
#include "ssbo/problems.hpp"
#include "ssbo/rbf.hpp"
#include "ssbo/samples.hpp"

#endif  // SSBO_SSBO_HPP
