#pragma once

#include "subflow/baselines.hpp"
#include "subflow/cloud.hpp"
#include "subflow/errors.hpp"
#include "subflow/experiments.hpp"
#include "subflow/generators.hpp"
#include "subflow/geodesic.hpp"
#include "subflow/geometry.hpp"
#include "subflow/io.hpp"
#include "subflow/logmap.hpp"
#include "subflow/moments.hpp"
#include "subflow/rng.hpp"
#include "subflow/stats.hpp"
#include "subflow/subbundle.hpp"
#include "subflow/submanifold.hpp"
