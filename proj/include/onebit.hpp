// SPDX-License-Identifier: Apache-2.0
//
// onebit-mmse: MMSE channel estimation for one-bit quantized MIMO systems
// Copyright (C) 2026 The onebit-mmse authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------


// Umbrella header.

#pragma once

#include "onebit/errors.hpp"
#include "onebit/numerics.hpp"
#include "onebit/quadrature.hpp"
#include "onebit/rng.hpp"
#include "onebit/orthant.hpp"
#include "onebit/channel_model.hpp"
#include "onebit/estimators.hpp"
#include "onebit/sim_harness.hpp"
#include "onebit/config_io.hpp"
