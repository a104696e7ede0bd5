#pragma once

#include "estbias/analysis.hpp"
#include "estbias/calibration.hpp"
#include "estbias/dataset.hpp"
#include "estbias/distributions.hpp"
#include "estbias/errors.hpp"
#include "estbias/measures.hpp"
#include "estbias/simulation.hpp"
