// Copyright 2026 The wmbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// -----------------------------------------------------------------------------

// Umbrella header.

#ifndef WMBENCH_WMBENCH_HPP_
#define WMBENCH_WMBENCH_HPP_

#include "wmbench/attacks.hpp"
#include "wmbench/csv.hpp"
#include "wmbench/denoise.hpp"
#include "wmbench/experiments.hpp"
#include "wmbench/features.hpp"
#include "wmbench/filters.hpp"
#include "wmbench/image.hpp"
#include "wmbench/image_io.hpp"
#include "wmbench/metrics.hpp"
#include "wmbench/mlp.hpp"
#include "wmbench/parallel.hpp"
#include "wmbench/pgd.hpp"
#include "wmbench/seeding.hpp"
#include "wmbench/substitute.hpp"
#include "wmbench/svd.hpp"
#include "wmbench/svg.hpp"
#include "wmbench/synth.hpp"
#include "wmbench/theory.hpp"
#include "wmbench/tradeoff.hpp"
#include "wmbench/transforms.hpp"
#include "wmbench/watermark.hpp"

#endif  // WMBENCH_WMBENCH_HPP_
