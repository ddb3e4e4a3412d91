#pragma once

#include "oraclenet/common.hpp"
#include "oraclenet/crypto_vrf.hpp"
#include "oraclenet/selection.hpp"
#include "oraclenet/reputation.hpp"
#include "oraclenet/filtering.hpp"
#include "oraclenet/collection.hpp"
#include "oraclenet/aggregation.hpp"
#include "oraclenet/chain_contracts.hpp"
#include "oraclenet/simnet.hpp"
#include "oraclenet/simulation.hpp"
#include "oraclenet/harness.hpp"
