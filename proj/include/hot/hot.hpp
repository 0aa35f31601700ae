// SPDX-License-Identifier: Apache-2.0
#pragma once

// Umbrella header.

#include "hot/aggregator.hpp"
#include "hot/apply.hpp"
#include "hot/batch.hpp"
#include "hot/bench.hpp"
#include "hot/common.hpp"
#include "hot/convert.hpp"
#include "hot/elementwise.hpp"
#include "hot/graph.hpp"
#include "hot/graph_ops.hpp"
#include "hot/masked_tensor.hpp"
#include "hot/matmul.hpp"
#include "hot/models.hpp"
#include "hot/nn.hpp"
#include "hot/oracle.hpp"
#include "hot/preprocess.hpp"
#include "hot/random_gen.hpp"
#include "hot/reduce_expand.hpp"
#include "hot/rng.hpp"
#include "hot/sampler.hpp"
#include "hot/sparse_tensor.hpp"
#include "hot/verify.hpp"
