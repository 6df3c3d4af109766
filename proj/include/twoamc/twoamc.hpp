#pragma once

#include "twoamc/error.hpp"
#include "twoamc/semiring.hpp"
#include "twoamc/graph.hpp"
#include "twoamc/cnf.hpp"
#include "twoamc/sat.hpp"
#include "twoamc/definability.hpp"
#include "twoamc/treedecomp.hpp"
#include "twoamc/nnf.hpp"
#include "twoamc/compiler.hpp"
#include "twoamc/program.hpp"
