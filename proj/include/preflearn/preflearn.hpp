// Copyright 2026 The Preflearn Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "preflearn/active.hpp"
#include "preflearn/distributions.hpp"
#include "preflearn/harness.hpp"
#include "preflearn/linalg.hpp"
#include "preflearn/metrics.hpp"
#include "preflearn/model.hpp"
#include "preflearn/noise.hpp"
#include "preflearn/oracle.hpp"
#include "preflearn/passive.hpp"
#include "preflearn/rng.hpp"
#include "preflearn/simplex.hpp"
