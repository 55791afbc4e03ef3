#pragma once

#include "luxappraise/anchor_set.hpp"
#include "luxappraise/annotation_service.hpp"
#include "luxappraise/campaign.hpp"
#include "luxappraise/classifiers.hpp"
#include "luxappraise/crowd_tasks.hpp"
#include "luxappraise/dataset_io.hpp"
#include "luxappraise/embedding.hpp"
#include "luxappraise/error.hpp"
#include "luxappraise/evaluation.hpp"
#include "luxappraise/jsonl.hpp"
#include "luxappraise/matrix.hpp"
#include "luxappraise/metrics.hpp"
#include "luxappraise/records.hpp"
#include "luxappraise/rng.hpp"
#include "luxappraise/synthetic_world.hpp"
#include "luxappraise/valuation.hpp"
