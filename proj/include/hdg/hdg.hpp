#pragma once

#include "hdg/mesh.hpp"
#include "hdg/mesh_io.hpp"
#include "hdg/quadrature.hpp"
#include "hdg/basis.hpp"
#include "hdg/elastic_spaces.hpp"
#include "hdg/local_solver.hpp"
#include "hdg/skeleton.hpp"
#include "hdg/projections.hpp"
#include "hdg/verify/manufactured.hpp"
#include "hdg/verify/errors.hpp"
#include "hdg/verify/study.hpp"
#include "hdg/verify/oracle.hpp"
#include "hdg/verify/checks.hpp"
