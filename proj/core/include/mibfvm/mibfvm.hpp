#pragma once

#include "mibfvm/cases.hpp"
#include "mibfvm/errors.hpp"
#include "mibfvm/field.hpp"
#include "mibfvm/geometry.hpp"
#include "mibfvm/harness.hpp"
#include "mibfvm/mesh.hpp"
#include "mibfvm/mib.hpp"
#include "mibfvm/stencil.hpp"
#include "mibfvm/system.hpp"
#include "mibfvm/types.hpp"
