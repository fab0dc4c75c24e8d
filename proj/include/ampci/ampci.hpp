#pragma once

#include "ampci/amp.hpp"
#include "ampci/bench.hpp"
#include "ampci/channel.hpp"
#include "ampci/denoisers.hpp"
#include "ampci/image_io.hpp"
#include "ampci/metrics.hpp"
#include "ampci/patch.hpp"
#include "ampci/planes.hpp"
#include "ampci/rng.hpp"
#include "ampci/state_evolution.hpp"
#include "ampci/wavelet.hpp"
