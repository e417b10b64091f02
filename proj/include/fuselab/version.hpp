// Copyright 2026 The Fuselab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#define FUSELAB_VERSION_MAJOR 0
#define FUSELAB_VERSION_MINOR 1
#define FUSELAB_VERSION_PATCH 0
#define FUSELAB_VERSION "0.1.0"
