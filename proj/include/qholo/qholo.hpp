#pragma once

#include "qholo/analysis.hpp"
#include "qholo/config.hpp"
#include "qholo/crystal.hpp"
#include "qholo/detection.hpp"
#include "qholo/error.hpp"
#include "qholo/fft.hpp"
#include "qholo/field.hpp"
#include "qholo/grid.hpp"
#include "qholo/holography.hpp"
#include "qholo/image.hpp"
#include "qholo/io.hpp"
#include "qholo/oracle.hpp"
#include "qholo/parallel.hpp"
#include "qholo/pipeline.hpp"
#include "qholo/rng.hpp"
#include "qholo/spdc.hpp"
