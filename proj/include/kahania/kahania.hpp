#pragma once

// Umbrella header for the kahania computer-algebra engine.

#include "kahania/errors.hpp"
#include "kahania/expr.hpp"
#include "kahania/parser.hpp"
#include "kahania/normal.hpp"
#include "kahania/series.hpp"
#include "kahania/integrate.hpp"
#include "kahania/special_cases.hpp"
#include "kahania/kahanian.hpp"
#include "kahania/comprehensive.hpp"
#include "kahania/verify.hpp"
#include "kahania/resonance.hpp"
