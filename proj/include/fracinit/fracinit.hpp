#pragma once

#include "fracinit/errors.hpp"
#include "fracinit/specfn.hpp"
#include "fracinit/types.hpp"
#include "fracinit/kernels.hpp"
#include "fracinit/lyapunov.hpp"
#include "fracinit/regime.hpp"
#include "fracinit/rng.hpp"
#include "fracinit/statistics.hpp"
#include "fracinit/simulate.hpp"
#include "fracinit/verify.hpp"
