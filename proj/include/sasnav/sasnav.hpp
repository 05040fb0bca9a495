#pragma once

// Umbrella header for the whole library.

#include "sasnav/acoustic.hpp"
#include "sasnav/chirp.hpp"
#include "sasnav/config.hpp"
#include "sasnav/errors.hpp"
#include "sasnav/geometry.hpp"
#include "sasnav/imaging.hpp"
#include "sasnav/io.hpp"
#include "sasnav/kernel.hpp"
#include "sasnav/micronav.hpp"
#include "sasnav/ping.hpp"
#include "sasnav/scene.hpp"
#include "sasnav/sim.hpp"
#include "sasnav/solver.hpp"
#include "sasnav/track.hpp"
