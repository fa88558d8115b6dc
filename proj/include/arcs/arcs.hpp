#pragma once

#include "arcs/consensus.hpp"
#include "arcs/errors.hpp"
#include "arcs/experiment.hpp"
#include "arcs/geometry.hpp"
#include "arcs/io.hpp"
#include "arcs/matching.hpp"
#include "arcs/parallel.hpp"
#include "arcs/pipeline.hpp"
#include "arcs/random.hpp"
#include "arcs/refine.hpp"
#include "arcs/stabbing.hpp"
#include "arcs/synthetic.hpp"
