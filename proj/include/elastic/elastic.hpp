#pragma once

#include "vec.hpp"
#include "elliptic.hpp"
#include "discrete_curve.hpp"
#include "intersections.hpp"
#include "elastica.hpp"
#include "flow.hpp"
#include "perturb.hpp"
#include "io.hpp"
#include "experiments.hpp"
