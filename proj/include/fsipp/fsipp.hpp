#pragma once

#include "fsipp/diag.hpp"
#include "fsipp/io.hpp"
#include "fsipp/moments.hpp"
#include "fsipp/poly.hpp"
#include "fsipp/problem.hpp"
#include "fsipp/relax.hpp"
#include "fsipp/sdp.hpp"
#include "fsipp/soscert.hpp"
