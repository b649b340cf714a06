// Copyright 2026 The pgvoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "pgvoc/audio.hpp"
#include "pgvoc/corpus.hpp"
#include "pgvoc/error.hpp"
#include "pgvoc/fft.hpp"
#include "pgvoc/griffin_lim.hpp"
#include "pgvoc/grid.hpp"
#include "pgvoc/losses.hpp"
#include "pgvoc/mel.hpp"
#include "pgvoc/metrics.hpp"
#include "pgvoc/parallel.hpp"
#include "pgvoc/phase_gradient.hpp"
#include "pgvoc/phase_integration.hpp"
#include "pgvoc/pipeline.hpp"
#include "pgvoc/random.hpp"
#include "pgvoc/run_config.hpp"
#include "pgvoc/stft.hpp"
#include "pgvoc/synth.hpp"
#include "pgvoc/tensor_file.hpp"
#include "pgvoc/wav.hpp"
