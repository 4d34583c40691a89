// SPDX-License-Identifier: Apache-2.0
//
// Umbrella header.

#pragma once

#include "speccoh/anomaly.hpp"
#include "speccoh/coherence.hpp"
#include "speccoh/field.hpp"
#include "speccoh/fit.hpp"
#include "speccoh/grid.hpp"
#include "speccoh/matern.hpp"
#include "speccoh/models.hpp"
#include "speccoh/nelder_mead.hpp"
#include "speccoh/pair_spectrum.hpp"
#include "speccoh/periodogram.hpp"
#include "speccoh/simulate.hpp"
#include "speccoh/smoothing.hpp"
