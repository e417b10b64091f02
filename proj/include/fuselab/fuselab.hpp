// Copyright 2026 The Fuselab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "fuselab/augment.hpp"
#include "fuselab/data_model.hpp"
#include "fuselab/dataset_io.hpp"
#include "fuselab/defect_class.hpp"
#include "fuselab/error.hpp"
#include "fuselab/eval.hpp"
#include "fuselab/fusion.hpp"
#include "fuselab/geometry.hpp"
#include "fuselab/image.hpp"
#include "fuselab/manifest.hpp"
#include "fuselab/overlay.hpp"
#include "fuselab/png_io.hpp"
#include "fuselab/preprocess.hpp"
#include "fuselab/rng.hpp"
#include "fuselab/simulator.hpp"
#include "fuselab/split.hpp"
#include "fuselab/tuner.hpp"
#include "fuselab/version.hpp"
