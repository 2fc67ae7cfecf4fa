#pragma once

#include "quadsig/analysis.hpp"
#include "quadsig/covering.hpp"
#include "quadsig/errors.hpp"
#include "quadsig/geometry.hpp"
#include "quadsig/random.hpp"
#include "quadsig/random_code.hpp"
#include "quadsig/scheme.hpp"
#include "quadsig/serialization.hpp"
#include "quadsig/simulate.hpp"
