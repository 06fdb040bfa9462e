#ifndef DECGP_DECGP_HPP
#define DECGP_DECGP_HPP

#include "decgp/aggregation.hpp"
#include "decgp/consensus.hpp"
#include "decgp/experiments.hpp"
#include "decgp/gp.hpp"
#include "decgp/graph.hpp"
#include "decgp/kernel.hpp"
#include "decgp/netsim.hpp"
#include "decgp/training.hpp"
#include "decgp/types.hpp"

#endif  // DECGP_DECGP_HPP
