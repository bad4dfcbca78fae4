#pragma once

#include <chernoff_sbm/affinity.hpp>
#include <chernoff_sbm/assignment.hpp>
#include <chernoff_sbm/chernoff.hpp>
#include <chernoff_sbm/detect.hpp>
#include <chernoff_sbm/dists.hpp>
#include <chernoff_sbm/error.hpp>
#include <chernoff_sbm/experiments.hpp>
#include <chernoff_sbm/graph.hpp>
#include <chernoff_sbm/numeric.hpp>
#include <chernoff_sbm/rng.hpp>
#include <chernoff_sbm/sbm.hpp>
#include <chernoff_sbm/spectral.hpp>
