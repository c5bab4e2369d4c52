#pragma once

// Umbrella header: the whole library in one include.

#include "frx/derivative.hpp"
#include "frx/equation.hpp"
#include "frx/error.hpp"
#include "frx/eval.hpp"
#include "frx/expr.hpp"
#include "frx/extraction.hpp"
#include "frx/network.hpp"
#include "frx/numformat.hpp"
#include "frx/parse.hpp"
#include "frx/registry.hpp"
#include "frx/render.hpp"
#include "frx/simplify.hpp"
#include "frx/trainer.hpp"
#include "frx/verbalize.hpp"
