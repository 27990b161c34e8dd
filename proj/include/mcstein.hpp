// Copyright 2026 The mcstein Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "mcstein/bounds.hpp"
#include "mcstein/chaos.hpp"
#include "mcstein/chenstein.hpp"
#include "mcstein/distance.hpp"
#include "mcstein/error.hpp"
#include "mcstein/kernel.hpp"
#include "mcstein/malliavin.hpp"
#include "mcstein/model.hpp"
#include "mcstein/numeric.hpp"
#include "mcstein/parallel.hpp"
#include "mcstein/random.hpp"
#include "mcstein/sampling.hpp"
#include "mcstein/spectral.hpp"
