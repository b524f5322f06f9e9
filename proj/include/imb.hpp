/*
 * Copyright 2026 The imbench Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Umbrella header.

#pragma once

#include "imb/common.hpp"
#include "imb/dataset.hpp"
#include "imb/forest.hpp"
#include "imb/metrics.hpp"
#include "imb/neighbors.hpp"
#include "imb/resample.hpp"
#include "imb/mlp.hpp"
#include "imb/genmodel.hpp"
#include "imb/decide.hpp"
#include "imb/adapt.hpp"
#include "imb/technique.hpp"
#include "imb/bench.hpp"
