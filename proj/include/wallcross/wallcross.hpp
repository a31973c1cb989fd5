#pragma once

#include "wallcross/errors.hpp"
#include "wallcross/rational.hpp"
#include "wallcross/kgeom.hpp"
#include "wallcross/jswcf.hpp"
#include "wallcross/tables.hpp"
#include "wallcross/series.hpp"
#include "wallcross/rank0_direct.hpp"
#include "wallcross/decomposition.hpp"
#include "wallcross/rank0_inductive.hpp"
#include "wallcross/osv.hpp"
#include "wallcross/rank2.hpp"
#include "wallcross/config.hpp"
#include "wallcross/report.hpp"
