#pragma once

// Everything in one include.

#include "gpls/error.hpp"
#include "gpls/mindex.hpp"
#include "gpls/nodes.hpp"
#include "gpls/poly.hpp"
#include "gpls/linalg.hpp"
#include "gpls/variety.hpp"
#include "gpls/geom.hpp"
#include "gpls/surfaces.hpp"
#include "gpls/sdfit.hpp"
#include "gpls/io.hpp"
#include "gpls/bench.hpp"
