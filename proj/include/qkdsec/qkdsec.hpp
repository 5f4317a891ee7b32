#pragma once

#include "advantage.hpp"
#include "bell_state.hpp"
#include "bitstring.hpp"
#include "combinatorics.hpp"
#include "distribution.hpp"
#include "entropy.hpp"
#include "estimation.hpp"
#include "finitekey.hpp"
#include "hashing.hpp"
#include "keyrate.hpp"
#include "operator.hpp"
#include "pa_exhaustive.hpp"
#include "pipeline.hpp"
#include "reconciliation.hpp"
#include "rng.hpp"
#include "smooth.hpp"
