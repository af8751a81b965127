#pragma once

#include "revwel/anticonc.hpp"
#include "revwel/cheby.hpp"
#include "revwel/classify.hpp"
#include "revwel/dist.hpp"
#include "revwel/env.hpp"
#include "revwel/errors.hpp"
#include "revwel/mech.hpp"
#include "revwel/revenue_curve.hpp"
#include "revwel/sim.hpp"
#include "revwel/stats.hpp"
