/*
 * Copyright 2026 The defrag Authors. All Rights Reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except in compliance
 * with the License. You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software distributed under the License is distributed
 * on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the License for
 * the specific language governing permissions and limitations under the License.
 */


#ifndef DEFRAG_DEFRAG_HPP
#define DEFRAG_DEFRAG_HPP

#include "defrag/error.hpp"
#include "defrag/sparse.hpp"
#include "defrag/dataset.hpp"
#include "defrag/repr.hpp"
#include "defrag/split.hpp"
#include "defrag/tree.hpp"
#include "defrag/agglomerate.hpp"
#include "defrag/cluster_metrics.hpp"
#include "defrag/xc_metrics.hpp"
#include "defrag/fiat.hpp"
#include "defrag/refrag.hpp"
#include "defrag/ova.hpp"
#include "defrag/theory.hpp"
#include "defrag/synthetic.hpp"

#endif  // DEFRAG_DEFRAG_HPP
