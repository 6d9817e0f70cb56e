#pragma once

#include "rdh/core.hpp"
#include "rdh/dehaze.hpp"
#include "rdh/duality.hpp"
#include "rdh/filters.hpp"
#include "rdh/image.hpp"
#include "rdh/io.hpp"
#include "rdh/metrics.hpp"
#include "rdh/retinex.hpp"
#include "rdh/synth.hpp"
