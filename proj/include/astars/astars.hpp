#pragma once

#include "astars/active_stars.hpp"
#include "astars/bench.hpp"
#include "astars/core.hpp"
#include "astars/csv.hpp"
#include "astars/external_oracle.hpp"
#include "astars/faastars.hpp"
#include "astars/learning.hpp"
#include "astars/plot.hpp"
#include "astars/stars.hpp"
#include "astars/subspace.hpp"
#include "astars/surrogate.hpp"
