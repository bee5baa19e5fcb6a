/*
 * Copyright 2026 The phasepred Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Convenience header pulling in the whole library.

#include "phasepred/angles.hpp"
#include "phasepred/audio.hpp"
#include "phasepred/checkpoint.hpp"
#include "phasepred/grid.hpp"
#include "phasepred/grid_io.hpp"
#include "phasepred/losses.hpp"
#include "phasepred/model.hpp"
#include "phasepred/phase.hpp"
#include "phasepred/probe.hpp"
#include "phasepred/reconstruct.hpp"
#include "phasepred/spectral_maps.hpp"
#include "phasepred/stft.hpp"
#include "phasepred/synth.hpp"
#include "phasepred/train.hpp"

#define PHASEPRED_VERSION "0.1.0"
