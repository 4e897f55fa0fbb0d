// Copyright 2026 The Authors.
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

// Umbrella header.

#ifndef POOLTEST_POOLTEST_HPP
#define POOLTEST_POOLTEST_HPP

#include "pooltest/clusters.hpp"
#include "pooltest/core.hpp"
#include "pooltest/error.hpp"
#include "pooltest/fptas.hpp"
#include "pooltest/gain.hpp"
#include "pooltest/greedy.hpp"
#include "pooltest/identical.hpp"
#include "pooltest/io.hpp"
#include "pooltest/milp.hpp"
#include "pooltest/oracle.hpp"
#include "pooltest/pwl.hpp"
#include "pooltest/repool.hpp"

#endif  // POOLTEST_POOLTEST_HPP
