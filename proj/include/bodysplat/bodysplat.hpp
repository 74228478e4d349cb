// Copyright Contributors to the bodysplat Project
// SPDX-License-Identifier: Apache-2.0
//
// Everything at once.
//
#pragma once

#include "bench.hpp"
#include "body_model.hpp"
#include "config.hpp"
#include "dataio.hpp"
#include "fitting.hpp"
#include "gaussian_scene.hpp"
#include "gradcheck.hpp"
#include "losses.hpp"
#include "metrics.hpp"
#include "plots.hpp"
#include "predictor.hpp"
#include "rasterizer.hpp"
#include "training.hpp"
