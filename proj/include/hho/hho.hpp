#pragma once

#include "hho/common.hpp"
#include "hho/mesh.hpp"
#include "hho/quadrature.hpp"
#include "hho/basis.hpp"
#include "hho/local_ops.hpp"
#include "hho/lagrange.hpp"
#include "hho/smoothing.hpp"
#include "hho/system.hpp"
#include "hho/linalg.hpp"
#include "hho/analysis.hpp"
