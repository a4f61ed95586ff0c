#pragma once

#include "algebra.hpp"
#include "core.hpp"
#include "families.hpp"
#include "iterate.hpp"
#include "metrics.hpp"
#include "monotonicity.hpp"
#include "operators.hpp"
#include "random.hpp"
#include "spec_io.hpp"
