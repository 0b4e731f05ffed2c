// Copyright (c) 2026 waveop contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "waveop/ops/conv.hpp"
#include "waveop/ops/elementwise.hpp"
#include "waveop/ops/linalg.hpp"
#include "waveop/ops/reduce.hpp"
#include "waveop/ops/shape.hpp"
#include "waveop/ops/spectral.hpp"
#include "waveop/ops/wavelet_ops.hpp"
