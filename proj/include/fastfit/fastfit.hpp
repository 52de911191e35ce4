// Copyright 2026 the FastFit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "fastfit/audio.hpp"
#include "fastfit/error.hpp"
#include "fastfit/fft.hpp"
#include "fastfit/generator.hpp"
#include "fastfit/griffin_lim.hpp"
#include "fastfit/hash.hpp"
#include "fastfit/log.hpp"
#include "fastfit/losses.hpp"
#include "fastfit/mel.hpp"
#include "fastfit/min_phase.hpp"
#include "fastfit/model.hpp"
#include "fastfit/ops.hpp"
#include "fastfit/prior.hpp"
#include "fastfit/refine.hpp"
#include "fastfit/rng.hpp"
#include "fastfit/serialize.hpp"
#include "fastfit/stft.hpp"
#include "fastfit/wav.hpp"
