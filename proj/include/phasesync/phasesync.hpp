#pragma once

#include "phasesync/estimators.hpp"
#include "phasesync/harness.hpp"
#include "phasesync/io.hpp"
#include "phasesync/linalg.hpp"
#include "phasesync/manifold.hpp"
#include "phasesync/model.hpp"
#include "phasesync/rng.hpp"
#include "phasesync/version.hpp"
