// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "qloc/commands.hpp"
#include "qloc/direct.hpp"
#include "qloc/errors.hpp"
#include "qloc/fisher.hpp"
#include "qloc/mc.hpp"
#include "qloc/psf.hpp"
#include "qloc/qbound.hpp"
#include "qloc/quadrature.hpp"
#include "qloc/rng.hpp"
#include "qloc/sliver.hpp"
#include "qloc/spade.hpp"
#include "qloc/table.hpp"
