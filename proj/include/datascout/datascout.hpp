// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 DataScout Contributors

#pragma once

#include "datascout/analyze/analyze_file.hpp"
#include "datascout/analyze/captions.hpp"
#include "datascout/analyze/correlation.hpp"
#include "datascout/analyze/kde.hpp"
#include "datascout/analyze/predictability.hpp"
#include "datascout/analyze/result.hpp"
#include "datascout/analyze/text_summary.hpp"
#include "datascout/analyze/words.hpp"
#include "datascout/core/clock.hpp"
#include "datascout/core/error.hpp"
#include "datascout/core/fs.hpp"
#include "datascout/core/hash.hpp"
#include "datascout/core/http.hpp"
#include "datascout/core/rng.hpp"
#include "datascout/core/text.hpp"
#include "datascout/evalsuite.hpp"
#include "datascout/harvester.hpp"
#include "datascout/ingest/dataset_hub.hpp"
#include "datascout/ingest/document.hpp"
#include "datascout/ingest/feature_kind.hpp"
#include "datascout/ingest/file_entry.hpp"
#include "datascout/ingest/table.hpp"
#include "datascout/ingest/tabular.hpp"
#include "datascout/layout.hpp"
#include "datascout/modelgw.hpp"
#include "datascout/pipeline.hpp"
#include "datascout/prompts.hpp"
#include "datascout/ragindex.hpp"
#include "datascout/reports.hpp"
#include "datascout/server.hpp"
#include "datascout/service.hpp"
#include "datascout/synthgen.hpp"
