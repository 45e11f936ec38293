#pragma once

#include "powsq/errors.hpp"
#include "powsq/jacobi_core.hpp"
#include "powsq/quadrature_moments.hpp"
#include "powsq/special_fn.hpp"
#include "powsq/spectral.hpp"
#include "powsq/states.hpp"
