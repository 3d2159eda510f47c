#pragma once

#include "mifisher/channels.hpp"
#include "mifisher/error.hpp"
#include "mifisher/fisher.hpp"
#include "mifisher/hierarchy.hpp"
#include "mifisher/matcore.hpp"
#include "mifisher/nelder_mead.hpp"
#include "mifisher/povm.hpp"
#include "mifisher/states.hpp"
