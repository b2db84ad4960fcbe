#pragma once

// Convenience umbrella for the image-processing core (no HTTP or CLI).

#include "fundoscope/atrous.hpp"
#include "fundoscope/error.hpp"
#include "fundoscope/fractional.hpp"
#include "fundoscope/image_io.hpp"
#include "fundoscope/pipeline.hpp"
#include "fundoscope/raster.hpp"
#include "fundoscope/relief.hpp"
