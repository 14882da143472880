#pragma once

#include "d2ibc/common.hpp"
#include "d2ibc/dataset.hpp"
#include "d2ibc/sysid.hpp"
#include "d2ibc/invctrl.hpp"
#include "d2ibc/linctrl.hpp"
#include "d2ibc/simloop.hpp"
#include "d2ibc/tuning.hpp"
#include "d2ibc/simplex.hpp"
#include "d2ibc/stability.hpp"
#include "d2ibc/config.hpp"
#include "d2ibc/commands.hpp"
