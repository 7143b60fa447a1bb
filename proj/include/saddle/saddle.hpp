#pragma once

#include "saddle/critical_points.hpp"
#include "saddle/descent_engine.hpp"
#include "saddle/errors.hpp"
#include "saddle/experiments.hpp"
#include "saddle/function_zoo.hpp"
#include "saddle/inverse_map.hpp"
#include "saddle/io.hpp"
#include "saddle/linalg.hpp"
#include "saddle/objective_spec.hpp"
#include "saddle/random.hpp"
