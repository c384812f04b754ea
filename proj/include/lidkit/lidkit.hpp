// Copyright 2026 The lidkit Authors
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

#include "lidkit/audio.hpp"
#include "lidkit/common.hpp"
#include "lidkit/evaluate.hpp"
#include "lidkit/features.hpp"
#include "lidkit/fft.hpp"
#include "lidkit/frontend.hpp"
#include "lidkit/gmm.hpp"
#include "lidkit/manifest.hpp"
#include "lidkit/model_io.hpp"
#include "lidkit/parallel.hpp"
#include "lidkit/synth.hpp"
#include "lidkit/vq_dtw.hpp"
