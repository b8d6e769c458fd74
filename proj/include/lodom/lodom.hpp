// Umbrella header: pulls in the whole lodom toolkit.
#pragma once

#include "lodom/analysis.hpp"
#include "lodom/error.hpp"
#include "lodom/geom.hpp"
#include "lodom/imaging.hpp"
#include "lodom/ingest.hpp"
#include "lodom/point_cloud.hpp"
#include "lodom/registration.hpp"
#include "lodom/run_config.hpp"
#include "lodom/solver.hpp"
#include "lodom/trajectory.hpp"
