#pragma once

#include "neuropath/aggregation.hpp"
#include "neuropath/bench.hpp"
#include "neuropath/brute_force.hpp"
#include "neuropath/cost_volume.hpp"
#include "neuropath/cost_volume_io.hpp"
#include "neuropath/error.hpp"
#include "neuropath/forward.hpp"
#include "neuropath/grid.hpp"
#include "neuropath/image_io.hpp"
#include "neuropath/matching.hpp"
#include "neuropath/network.hpp"
#include "neuropath/oracle.hpp"
#include "neuropath/parallel.hpp"
#include "neuropath/pipeline.hpp"
#include "neuropath/random.hpp"
#include "neuropath/semiring.hpp"
#include "neuropath/shift.hpp"
#include "neuropath/stereo.hpp"
#include "neuropath/weights_io.hpp"
