#pragma once

#include "stravg/analysis.hpp"
#include "stravg/config.hpp"
#include "stravg/convex_set.hpp"
#include "stravg/engine.hpp"
#include "stravg/experiment.hpp"
#include "stravg/families.hpp"
#include "stravg/family.hpp"
#include "stravg/index_vector.hpp"
#include "stravg/schedule.hpp"
#include "stravg/strings.hpp"
#include "stravg/vec.hpp"
#include "stravg/weight_function.hpp"
