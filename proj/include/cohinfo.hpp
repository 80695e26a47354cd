#pragma once

#include "cohinfo/capacity.hpp"
#include "cohinfo/channel_spec.hpp"
#include "cohinfo/channels.hpp"
#include "cohinfo/eig.hpp"
#include "cohinfo/matrix.hpp"
#include "cohinfo/nelder_mead.hpp"
#include "cohinfo/parallel.hpp"
#include "cohinfo/random.hpp"
#include "cohinfo/rng.hpp"
#include "cohinfo/serialize.hpp"
#include "cohinfo/states.hpp"
#include "cohinfo/tomography.hpp"
#include "cohinfo/version.hpp"
