#pragma once

#include "clogit/errors.hpp"
#include "clogit/io.hpp"
#include "clogit/model.hpp"
#include "clogit/normalize.hpp"
#include "clogit/optimize.hpp"
#include "clogit/parallel.hpp"
#include "clogit/rng.hpp"
#include "clogit/simulate.hpp"
#include "clogit/stats.hpp"
#include "clogit/types.hpp"
