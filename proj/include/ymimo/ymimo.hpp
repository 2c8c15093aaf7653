#pragma once

#include "ymimo/error.hpp"
#include "ymimo/rng.hpp"
#include "ymimo/linalg.hpp"
#include "ymimo/channel.hpp"
#include "ymimo/dof_vector.hpp"
#include "ymimo/alignment.hpp"
#include "ymimo/transceiver.hpp"
#include "ymimo/simplex.hpp"
#include "ymimo/dof_region.hpp"
#include "ymimo/harness.hpp"
