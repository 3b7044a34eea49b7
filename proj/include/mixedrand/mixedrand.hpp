// Copyright 2026 The mixedrand Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Umbrella header.

#ifndef MIXEDRAND_MIXEDRAND_HPP_
#define MIXEDRAND_MIXEDRAND_HPP_

#include "mixedrand/bounds.hpp"
#include "mixedrand/clustering.hpp"
#include "mixedrand/design.hpp"
#include "mixedrand/estimation.hpp"
#include "mixedrand/generators.hpp"
#include "mixedrand/graph.hpp"
#include "mixedrand/io.hpp"
#include "mixedrand/matching.hpp"
#include "mixedrand/partition.hpp"
#include "mixedrand/random.hpp"
#include "mixedrand/simulation.hpp"

#define MIXEDRAND_VERSION "0.1.0"

#endif  // MIXEDRAND_MIXEDRAND_HPP_
