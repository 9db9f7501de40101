/*
 * Copyright 2026 The skewjoin Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include "skewjoin/closed_forms.hpp"
#include "skewjoin/cost_expression.hpp"
#include "skewjoin/error.hpp"
#include "skewjoin/executor.hpp"
#include "skewjoin/generator.hpp"
#include "skewjoin/hash.hpp"
#include "skewjoin/heavy_hitters.hpp"
#include "skewjoin/join_model.hpp"
#include "skewjoin/mapper.hpp"
#include "skewjoin/oracle.hpp"
#include "skewjoin/plan_io.hpp"
#include "skewjoin/planner.hpp"
#include "skewjoin/routing.hpp"
#include "skewjoin/share_solver.hpp"
#include "skewjoin/spec_io.hpp"
#include "skewjoin/sweep.hpp"
#include "skewjoin/tsv_io.hpp"
#include "skewjoin/tuple_store.hpp"
